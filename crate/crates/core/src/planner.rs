//! Configuration planner: goal polyline → joint angles → action script.
//!
//! Each pouch contributes one straight segment whose heading is the running
//! sum of joint angles chosen from a discrete grid. A segment is scored by
//! the discrete Fréchet distance between it (anchored at the goal point at
//! the same arc length) and the matching piece of the goal. The score only
//! depends on the pouch and the heading, so a dynamic program over
//! `(pouch, heading)` finds the optimal assignment.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RobotSpec;
use crate::geometry::{
    discrete_frechet, polyline_length, resample, shape_distance, slice_arclength, wrap_angle, Point2, SHAPE_SAMPLES,
};
use crate::kinematics::{shape_of, shortening_from_angle, BodyState, Joint};
use crate::script::{Action, ActionScript, Side};

/// Relative tolerance under which two plan costs count as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("goal needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("goal point {0} is not finite")]
    NonFinite(usize),
    #[error("goal length {goal_m} m exceeds available material {material_m} m")]
    MaterialExhausted { goal_m: f64, material_m: f64 },
    #[error("angle grid must be non-empty, contain 0 and stay inside (-π, π)")]
    BadGrid,
    #[error("goal CSV: {0}")]
    Csv(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalShape {
    pub polyline: Vec<Point2>,
    pub tolerance_m: f64,
}

impl GoalShape {
    pub fn new(polyline: Vec<Point2>, tolerance_m: f64) -> Result<Self, PlannerError> {
        if polyline.len() < 2 {
            return Err(PlannerError::TooFewPoints(polyline.len()));
        }
        if let Some(i) = polyline.iter().position(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(PlannerError::NonFinite(i));
        }
        Ok(Self { polyline, tolerance_m })
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.polyline)
    }
}

/// Read `x_m,y_m` rows (header optional).
pub fn read_goal_csv(text: &str) -> Result<Vec<Point2>, PlannerError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| PlannerError::Csv(e.to_string()))?;
        if rec.len() < 2 {
            return Err(PlannerError::Csv(format!("row {i}: expected two columns")));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => pts.push(Point2::new(x, y)),
            _ if i == 0 => continue,
            _ => return Err(PlannerError::Csv(format!("row {i}: not a number"))),
        }
    }
    Ok(pts)
}

/// Default grid: 0, ±15°, ±30°, ±45°, ±60°, ±90°.
pub fn default_angle_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    for d in [15.0f64, 30.0, 45.0, 60.0, 90.0] {
        g.push(d.to_radians());
        g.push(-d.to_radians());
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPlan {
    /// Target joint angle per pouch covered by the goal, base first.
    pub angles: Vec<f64>,
    /// Objective value minimized by the planner.
    pub cost: f64,
    /// Shape distance between the predicted robot and the goal.
    pub residual_m: f64,
    pub goal_length_m: f64,
    pub tolerance_m: f64,
}

impl JointPlan {
    pub fn within_tolerance(&self) -> bool {
        self.residual_m <= self.tolerance_m
    }
}

/// Everted length the robot needs for `goal_m`.
fn target_everted(spec: &RobotSpec, goal_m: f64) -> f64 {
    spec.everted_length().max(goal_m)
}

/// Pouch segments `[start, end)` along the goal.
fn pouch_spans(spec: &RobotSpec, goal_m: f64) -> Vec<(f64, f64)> {
    let pitch = spec.pitch();
    let n = ((goal_m / pitch) - 1e-9).ceil().max(1.0) as usize;
    (0..n)
        .map(|i| (i as f64 * pitch, ((i + 1) as f64 * pitch).min(goal_m)))
        .collect()
}

/// Pouches in `spans` that will be fully everted, i.e. can hold a joint.
fn jointable(spec: &RobotSpec, goal_m: f64, n: usize) -> Vec<bool> {
    let everted = target_everted(spec, goal_m);
    (0..n)
        .map(|i| (i + 1) as f64 * spec.pitch() <= everted + 1e-9)
        .collect()
}

/// Cost of one pouch segment at `heading`.
pub fn segment_cost(goal: &[Point2], span: (f64, f64), heading: f64) -> f64 {
    let piece = slice_arclength(goal, span.0, span.1);
    let start = piece[0];
    let len = span.1 - span.0;
    let seg = [
        start,
        Point2::new(start.x + len * heading.cos(), start.y + len * heading.sin()),
    ];
    discrete_frechet(&resample(&seg, SHAPE_SAMPLES), &resample(&piece, SHAPE_SAMPLES))
}

/// Objective value of an explicit angle assignment (one angle per pouch span).
pub fn plan_cost(goal: &GoalShape, spec: &RobotSpec, angles: &[f64]) -> f64 {
    let spans = pouch_spans(spec, goal.length());
    assert_eq!(angles.len(), spans.len());
    let mut heading = 0.0;
    spans
        .iter()
        .zip(angles)
        .map(|(&span, &a)| {
            heading = wrap_angle(heading + a);
            segment_cost(&goal.polyline, span, heading)
        })
        .sum()
}

fn heading_key(h: f64) -> i64 {
    let w = wrap_angle(h);
    // −π and π are the same direction
    let w = if (w + PI).abs() < 1e-9 { PI } else { w };
    (w * 1e9).round() as i64
}

#[derive(Clone, Debug)]
struct Partial {
    cost: f64,
    abs_sum: f64,
    angles: Vec<f64>,
}

impl Partial {
    /// Lower cost, then smaller total |angle|, then joints nearer the base.
    fn better_than(&self, other: &Partial) -> bool {
        let tol = TIE_TOL * other.cost.abs().max(1.0);
        if self.cost < other.cost - tol {
            return true;
        }
        if self.cost > other.cost + tol {
            return false;
        }
        if (self.abs_sum - other.abs_sum).abs() > 1e-12 {
            return self.abs_sum < other.abs_sum;
        }
        for (a, b) in self.angles.iter().zip(&other.angles) {
            let (za, zb) = (*a == 0.0, *b == 0.0);
            if za != zb {
                return !za;
            }
            if a != b {
                return a.abs() < b.abs() || (a.abs() == b.abs() && *a > *b);
            }
        }
        false
    }
}

/// Choose per-pouch joint angles from `grid` that best reproduce `goal`.
pub fn fit_joint_angles(goal: &GoalShape, spec: &RobotSpec, grid: &[f64]) -> Result<JointPlan, PlannerError> {
    if grid.is_empty() || !grid.contains(&0.0) || grid.iter().any(|a| !(a.abs() < PI)) {
        return Err(PlannerError::BadGrid);
    }
    let goal_m = goal.length();
    if goal_m > spec.length_m + 1e-9 {
        return Err(PlannerError::MaterialExhausted {
            goal_m,
            material_m: spec.length_m,
        });
    }
    let spans = pouch_spans(spec, goal_m);
    let allowed = jointable(spec, goal_m, spans.len());

    // grid in tie-break order so equal candidates are met smallest first
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)));
    grid.dedup();

    let mut cost_cache: BTreeMap<(usize, i64), f64> = BTreeMap::new();
    let mut layer: BTreeMap<i64, (f64, Partial)> = BTreeMap::new();
    layer.insert(
        heading_key(0.0),
        (
            0.0,
            Partial {
                cost: 0.0,
                abs_sum: 0.0,
                angles: Vec::new(),
            },
        ),
    );
    for (i, &span) in spans.iter().enumerate() {
        let choices: &[f64] = if allowed[i] { &grid } else { &[0.0] };
        let mut next: BTreeMap<i64, (f64, Partial)> = BTreeMap::new();
        for (heading, partial) in layer.values() {
            for &a in choices {
                let h = wrap_angle(heading + a);
                let key = heading_key(h);
                let c = *cost_cache
                    .entry((i, key))
                    .or_insert_with(|| segment_cost(&goal.polyline, span, h));
                let mut angles = partial.angles.clone();
                angles.push(a);
                let cand = Partial {
                    cost: partial.cost + c,
                    abs_sum: partial.abs_sum + a.abs(),
                    angles,
                };
                match next.get(&key) {
                    Some((_, best)) if !cand.better_than(best) => {}
                    _ => {
                        next.insert(key, (h, cand));
                    }
                }
            }
        }
        layer = next;
    }
    let best = layer
        .into_values()
        .map(|(_, p)| p)
        .reduce(|best, p| if p.better_than(&best) { p } else { best })
        .expect("grid contains 0 so every layer is populated");

    let mut plan = JointPlan {
        angles: best.angles,
        cost: best.cost,
        residual_m: 0.0,
        goal_length_m: goal_m,
        tolerance_m: goal.tolerance_m,
    };
    plan.residual_m = shape_distance(&predicted_shape(&plan, spec), &goal.polyline);
    Ok(plan)
}

/// Robot shape the plan produces, cut at the goal length.
pub fn predicted_shape(plan: &JointPlan, spec: &RobotSpec) -> Vec<Point2> {
    let everted = target_everted(spec, plan.goal_length_m);
    let mut body = BodyState::new(everted, spec.length_m, spec.num_pouches, spec.cable_offset())
        .expect("plan length was checked against the material");
    for (i, &a) in plan.angles.iter().enumerate() {
        if a != 0.0 {
            body.chain.joints.insert(i, Joint { angle: a, locked: true });
        }
    }
    truncate_shape(&shape_of(&body.chain), plan.goal_length_m)
}

/// Robot polyline cut at arc length `length_m`.
pub fn truncate_shape(shape: &[Point2], length_m: f64) -> Vec<Point2> {
    if polyline_length(shape) <= length_m + 1e-12 {
        return shape.to_vec();
    }
    slice_arclength(shape, 0.0, length_m)
}

/// Turn a plan into engine actions for a straight, fully jammed robot.
///
/// Grows first if the goal is longer than the everted length, then for each
/// non-zero joint from base to tip: unjam, pull, jam. Only one pouch is
/// compliant at any time, so each pull buckles exactly that pouch.
pub fn compile_actions(plan: &JointPlan, spec: &RobotSpec) -> ActionScript {
    let mut script = Vec::new();
    let everted = spec.everted_length();
    if plan.goal_length_m > everted + 1e-12 {
        script.push(Action::Grow {
            length_m: plan.goal_length_m - everted,
        });
    }
    let r = spec.cable_offset();
    for (pouch, &a) in plan.angles.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let side = if a > 0.0 { Side::Left } else { Side::Right };
        script.push(Action::UnjamPouch { pouch });
        script.push(Action::PullCable {
            side,
            length_m: shortening_from_angle(a, r),
        });
        script.push(Action::JamPouch { pouch });
    }
    script
}
