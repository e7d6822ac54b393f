//! Planar virtual-joint model of the robot body.
//!
//! The body is a chain of segments from the base to the tip. Every pouch
//! boundary is a segment boundary, and a buckle at pouch `i` is an ideal
//! hinge at arc length `i·pitch`. Left cable pulls bend counter-clockwise
//! (positive angles), right pulls clockwise.
//!
//! A pull buckles the weakest non-jammed everted pouch; if every everted
//! pouch is jammed the whole everted length bends into a constant-curvature
//! arc instead. Locked joints (jammed pouches) keep their angle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, Pose2};
use crate::pneumatics::PouchState;
use crate::script::Side;

/// Points sampled along each segment by [`shape_of`].
pub const SAMPLES_PER_SEGMENT: usize = 16;

const EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("shortening {shortening_m} m saturates a hinge with offset {offset_m} m (limit {limit_m} m)")]
    Saturated {
        shortening_m: f64,
        offset_m: f64,
        limit_m: f64,
    },
    #[error("pull length must be non-negative and finite, got {0}")]
    BadLength(f64),
    #[error("joint at pouch {0} is locked")]
    LockedJoint(usize),
    #[error("pouch {pouch} is {state:?}; only a jammed pouch can lock its joint")]
    NotJammed { pouch: usize, state: PouchState },
    #[error("the {0:?} cable is taut around the bend; release it before pulling the other side")]
    OpposingCable(Side),
    #[error("nothing on the {side:?} side can give back {remaining_m} m of cable")]
    NothingToRelease { side: Side, remaining_m: f64 },
    #[error("cable moment {moment_nm} N·m buckles a jammed pouch; this regime is not modelled")]
    JammedBuckle { moment_nm: f64 },
    #[error("growth of {requested_m} m exceeds remaining material {available_m} m")]
    MaterialExhausted { requested_m: f64, available_m: f64 },
}

/// Hinge angle produced by shortening one side by `shortening_m` at offset `offset_m`.
///
/// Inverse of [`shortening_from_angle`]: `Δl = 2·r·sin(θ/2)`.
pub fn angle_from_shortening(shortening_m: f64, offset_m: f64) -> Result<f64, KinematicsError> {
    if !(shortening_m >= 0.0) || !shortening_m.is_finite() {
        return Err(KinematicsError::BadLength(shortening_m));
    }
    if shortening_m >= 2.0 * offset_m {
        return Err(KinematicsError::Saturated {
            shortening_m,
            offset_m,
            limit_m: 2.0 * offset_m,
        });
    }
    Ok(2.0 * (shortening_m / (2.0 * offset_m)).asin())
}

/// Side shortening of a hinge bent by `angle` (sign ignored).
pub fn shortening_from_angle(angle: f64, offset_m: f64) -> f64 {
    2.0 * offset_m * (angle.abs() / 2.0).sin()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length_m: f64,
    /// Signed, 1/m; zero for straight.
    pub curvature: f64,
    pub pouch: usize,
    /// True when the segment begins at the base-side boundary of its pouch.
    pub starts_pouch: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub angle: f64,
    pub locked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointChain {
    pub base: Pose2,
    pub segments: Vec<Segment>,
    /// Keyed by pouch index; serialized as a list of `{pouch, angle, locked}`.
    #[serde(with = "joint_list")]
    pub joints: BTreeMap<usize, Joint>,
}

mod joint_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::Joint;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        pouch: usize,
        angle: f64,
        locked: bool,
    }

    pub fn serialize<S: Serializer>(joints: &BTreeMap<usize, Joint>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Entry> = joints
            .iter()
            .map(|(&pouch, j)| Entry {
                pouch,
                angle: j.angle,
                locked: j.locked,
            })
            .collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, Joint>, D::Error> {
        let list = Vec::<Entry>::deserialize(d)?;
        Ok(list
            .into_iter()
            .map(|e| {
                (
                    e.pouch,
                    Joint {
                        angle: e.angle,
                        locked: e.locked,
                    },
                )
            })
            .collect())
    }
}

impl JointChain {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.length_m).sum()
    }

    /// Total signed bend carried by segment curvature.
    pub fn arc_bend(&self) -> f64 {
        self.segments.iter().map(|s| s.curvature * s.length_m).sum()
    }

    pub fn joint_angle(&self, pouch: usize) -> f64 {
        self.joints.get(&pouch).map_or(0.0, |j| j.angle)
    }

    pub fn tip_pose(&self) -> Pose2 {
        let mut pose = self.base;
        for seg in &self.segments {
            pose = self.enter(pose, seg).advance(seg.length_m, seg.curvature);
        }
        pose
    }

    fn enter(&self, pose: Pose2, seg: &Segment) -> Pose2 {
        match (seg.starts_pouch, self.joints.get(&seg.pouch)) {
            (true, Some(j)) => pose.rotate(j.angle),
            _ => pose,
        }
    }
}

/// World-frame polyline of the chain, base first.
pub fn shape_of(chain: &JointChain) -> Vec<Point2> {
    let mut pts = Vec::with_capacity(1 + chain.segments.len() * SAMPLES_PER_SEGMENT);
    let mut pose = chain.base;
    pts.push(pose.point());
    for seg in &chain.segments {
        pose = chain.enter(pose, seg);
        for k in 1..=SAMPLES_PER_SEGMENT {
            let s = seg.length_m * k as f64 / SAMPLES_PER_SEGMENT as f64;
            pts.push(pose.advance(s, seg.curvature).point());
        }
        pose = pose.advance(seg.length_m, seg.curvature);
    }
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CableState {
    pub side: Side,
    /// Cable taken up by the spool (m).
    pub retraction_m: f64,
    /// Commanded pull that has not moved the body yet (below the buckling gate).
    pub stored_pull_m: f64,
}

impl CableState {
    fn new(side: Side) -> Self {
        Self {
            side,
            retraction_m: 0.0,
            stored_pull_m: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthState {
    pub everted_length_m: f64,
    pub total_material_length_m: f64,
    pub pouch_pitch_m: f64,
}

impl GrowthState {
    /// Pouch `i` is everted once `(i+1)·pitch` is out.
    pub fn everted_pouches(&self) -> usize {
        ((self.everted_length_m + 1e-9) / self.pouch_pitch_m).floor() as usize
    }
}

/// Per everted pouch: whether it is jammed and the moment that buckles it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PouchStrength {
    pub jammed: bool,
    pub critical_moment_nm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PullOutcome {
    Unchanged,
    /// A virtual joint bent further (or formed).
    Buckle {
        pouch: usize,
        angle: f64,
        formed: bool,
    },
    /// Uniform bend over the everted length.
    Arc {
        bend: f64,
    },
    /// Tension below the buckling gate; no shape change.
    Stored {
        moment_nm: f64,
    },
}

/// Geometry, cables and growth of the robot body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub chain: JointChain,
    pub left: CableState,
    pub right: CableState,
    pub growth: GrowthState,
    pub cable_offset_m: f64,
}

impl BodyState {
    /// Straight body along +x with `everted_m` of `total_m` material out.
    pub fn new(everted_m: f64, total_m: f64, num_pouches: usize, cable_offset_m: f64) -> Result<Self, KinematicsError> {
        let mut body = BodyState {
            chain: JointChain {
                base: Pose2::default(),
                segments: Vec::new(),
                joints: BTreeMap::new(),
            },
            left: CableState::new(Side::Left),
            right: CableState::new(Side::Right),
            growth: GrowthState {
                everted_length_m: 0.0,
                total_material_length_m: total_m,
                pouch_pitch_m: total_m / num_pouches as f64,
            },
            cable_offset_m,
        };
        body.grow(everted_m)?;
        Ok(body)
    }

    pub fn cable(&self, side: Side) -> &CableState {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn cable_mut(&mut self, side: Side) -> &mut CableState {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    /// Retraction implied by the geometry for `side`.
    pub fn geometric_retraction(&self, side: Side) -> f64 {
        let r = self.cable_offset_m;
        let sign = side.sign();
        let hinges: f64 = self
            .chain
            .joints
            .values()
            .filter(|j| j.angle * sign > 0.0)
            .map(|j| shortening_from_angle(j.angle, r))
            .sum();
        hinges + r * (self.chain.arc_bend() * sign).max(0.0)
    }

    /// Pull `length_m` of cable on `side`.
    ///
    /// `strengths` lists the everted pouches base to tip. `tension_gain`
    /// converts commanded pull to tension; `None` means the spool keeps
    /// pulling until the weakest pouch gives.
    pub fn apply_pull(
        &mut self,
        side: Side,
        length_m: f64,
        strengths: &[PouchStrength],
        tension_gain: Option<f64>,
    ) -> Result<PullOutcome, KinematicsError> {
        if !(length_m >= 0.0) || !length_m.is_finite() {
            return Err(KinematicsError::BadLength(length_m));
        }
        if length_m == 0.0 {
            return Ok(PullOutcome::Unchanged);
        }
        let r = self.cable_offset_m;
        let weakest_compliant = strengths
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.jammed)
            .min_by(|a, b| a.1.critical_moment_nm.total_cmp(&b.1.critical_moment_nm))
            .map(|(i, s)| (i, s.critical_moment_nm));
        let weakest_jammed = strengths
            .iter()
            .filter(|s| s.jammed)
            .map(|s| s.critical_moment_nm)
            .min_by(f64::total_cmp);

        let moment = tension_gain.map(|g| g * (self.cable(side).stored_pull_m + length_m) * r);
        if let Some(m) = moment {
            let gate = weakest_compliant
                .map(|w| w.1)
                .or(weakest_jammed)
                .unwrap_or(f64::INFINITY);
            if weakest_compliant.is_some() && m < gate {
                self.cable_mut(side).stored_pull_m += length_m;
                return Ok(PullOutcome::Stored { moment_nm: m });
            }
            if weakest_jammed.is_some_and(|j| m >= j) {
                return Err(KinematicsError::JammedBuckle { moment_nm: m });
            }
        }

        let outcome = match weakest_compliant {
            Some((pouch, _)) => self.bend_joint(pouch, side, length_m)?,
            None => self.bend_arc(side, length_m)?,
        };
        let cable = self.cable_mut(side);
        cable.retraction_m += length_m;
        cable.stored_pull_m = 0.0;
        Ok(outcome)
    }

    fn bend_joint(&mut self, pouch: usize, side: Side, length_m: f64) -> Result<PullOutcome, KinematicsError> {
        let r = self.cable_offset_m;
        let existing = self.chain.joints.get(&pouch).copied();
        if let Some(j) = existing {
            if j.locked {
                return Err(KinematicsError::LockedJoint(pouch));
            }
            if j.angle * side.sign() < 0.0 {
                return Err(KinematicsError::OpposingCable(side.opposite()));
            }
        }
        let current = existing.map_or(0.0, |j| shortening_from_angle(j.angle, r));
        let angle = side.sign() * angle_from_shortening(current + length_m, r)?;
        self.chain.joints.insert(pouch, Joint { angle, locked: false });
        Ok(PullOutcome::Buckle {
            pouch,
            angle,
            formed: existing.is_none_or(|j| j.angle == 0.0),
        })
    }

    fn bend_arc(&mut self, side: Side, length_m: f64) -> Result<PullOutcome, KinematicsError> {
        let bend = self.chain.arc_bend();
        if bend * side.sign() < -EPS {
            return Err(KinematicsError::OpposingCable(side.opposite()));
        }
        let total = self.chain.length();
        let alpha = side.sign() * length_m / self.cable_offset_m;
        if total > 0.0 {
            let dk = alpha / total;
            for seg in &mut self.chain.segments {
                seg.curvature += dk;
            }
        }
        Ok(PullOutcome::Arc { bend: alpha })
    }

    /// Pay out `length_m` of cable on `side`.
    ///
    /// Unlocked joints bent toward `side` straighten first (tip-most first),
    /// then any arc bend toward `side` relaxes uniformly.
    pub fn release(&mut self, side: Side, length_m: f64) -> Result<(), KinematicsError> {
        if !(length_m >= 0.0) || !length_m.is_finite() {
            return Err(KinematicsError::BadLength(length_m));
        }
        let mut next = self.clone();
        let r = next.cable_offset_m;
        let sign = side.sign();
        let mut remaining = length_m;

        let stored = next.cable(side).stored_pull_m.min(remaining);
        next.cable_mut(side).stored_pull_m -= stored;
        remaining -= stored;

        let movable: Vec<usize> = next
            .chain
            .joints
            .iter()
            .rev()
            .filter(|(_, j)| !j.locked && j.angle * sign > 0.0)
            .map(|(&k, _)| k)
            .collect();
        for k in movable {
            if remaining <= EPS {
                break;
            }
            let j = next.chain.joints.get_mut(&k).unwrap();
            let current = shortening_from_angle(j.angle, r);
            let give = current.min(remaining);
            j.angle = sign * angle_from_shortening(current - give, r)?;
            remaining -= give;
            next.cable_mut(side).retraction_m -= give;
        }

        let bend = next.chain.arc_bend();
        if remaining > EPS && bend * sign > EPS {
            let give_angle = (remaining / r).min(bend.abs());
            let factor = (bend.abs() - give_angle) / bend.abs();
            for seg in &mut next.chain.segments {
                seg.curvature *= factor;
            }
            remaining -= give_angle * r;
            next.cable_mut(side).retraction_m -= give_angle * r;
        }

        if remaining > 1e-9 {
            return Err(KinematicsError::NothingToRelease {
                side,
                remaining_m: remaining,
            });
        }
        let cable = next.cable_mut(side);
        cable.retraction_m = cable.retraction_m.max(0.0);
        *self = next;
        Ok(())
    }

    /// Freeze the joint of a jammed pouch at its current angle.
    pub fn lock_joint(&mut self, pouch: usize, state: PouchState) -> Result<(), KinematicsError> {
        if state != PouchState::Jammed {
            return Err(KinematicsError::NotJammed { pouch, state });
        }
        self.chain
            .joints
            .entry(pouch)
            .and_modify(|j| j.locked = true)
            .or_insert(Joint {
                angle: 0.0,
                locked: true,
            });
        Ok(())
    }

    /// Release a joint after its pouch is unjammed.
    pub fn unlock_joint(&mut self, pouch: usize) {
        if let Some(j) = self.chain.joints.get_mut(&pouch) {
            j.locked = false;
        }
    }

    /// Evert `length_m` more material at the tip. Returns the pouches that
    /// became everted.
    pub fn grow(&mut self, length_m: f64) -> Result<Vec<usize>, KinematicsError> {
        if !(length_m >= 0.0) || !length_m.is_finite() {
            return Err(KinematicsError::BadLength(length_m));
        }
        let g = &self.growth;
        let available = g.total_material_length_m - g.everted_length_m;
        if length_m > available + 1e-12 {
            return Err(KinematicsError::MaterialExhausted {
                requested_m: length_m,
                available_m: available,
            });
        }
        if length_m == 0.0 {
            return Ok(Vec::new());
        }
        let before = g.everted_pouches();
        let pitch = g.pouch_pitch_m;
        let num_pouches = (g.total_material_length_m / pitch).round() as usize;
        let end = (g.everted_length_m + length_m).min(g.total_material_length_m);
        let mut s = g.everted_length_m;
        while end - s > 1e-12 {
            let pouch = (((s + 1e-9) / pitch).floor() as usize).min(num_pouches - 1);
            let boundary = pouch as f64 * pitch;
            let next_boundary = if pouch + 1 == num_pouches {
                g.total_material_length_m
            } else {
                (pouch + 1) as f64 * pitch
            };
            let stop = next_boundary.min(end);
            let starts_pouch = (s - boundary).abs() <= 1e-9;
            // snap to the boundary so the next piece starts cleanly
            let stop = if (next_boundary - stop).abs() <= 1e-9 {
                next_boundary
            } else {
                stop
            };
            self.chain.segments.push(Segment {
                length_m: stop - s,
                curvature: 0.0,
                pouch,
                starts_pouch,
            });
            s = stop;
        }
        self.growth.everted_length_m = end;
        Ok((before..self.growth.everted_pouches()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    const R: f64 = 0.043;

    fn body() -> BodyState {
        BodyState::new(1.2, 1.2, 8, R).unwrap()
    }

    fn strengths(compliant: &[usize]) -> Vec<PouchStrength> {
        (0..8)
            .map(|i| {
                let jammed = !compliant.contains(&i);
                PouchStrength {
                    jammed,
                    critical_moment_nm: if jammed { 1.7 } else { 0.85 },
                }
            })
            .collect()
    }

    #[test]
    fn angle_shortening_examples() {
        assert_eq!(angle_from_shortening(0.0, R).unwrap(), 0.0);
        let a = angle_from_shortening(0.0608, R).unwrap();
        assert!((a.to_degrees() - 90.0).abs() < 0.1, "{}", a.to_degrees());
        assert!((shortening_from_angle(PI, R) - 2.0 * R).abs() < 1e-15);
        assert!(matches!(
            angle_from_shortening(2.0 * R, R),
            Err(KinematicsError::Saturated { .. })
        ));
    }

    #[test]
    fn straight_chain_endpoints() {
        let b = body();
        let pts = shape_of(&b.chain);
        assert_eq!(pts.len(), 1 + 8 * SAMPLES_PER_SEGMENT);
        let tip = *pts.last().unwrap();
        assert!((tip.dist(pts[0]) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn right_angle_at_midpoint() {
        let mut b = body();
        b.chain.joints.insert(
            4,
            Joint {
                angle: FRAC_PI_2,
                locked: false,
            },
        );
        let tip = *shape_of(&b.chain).last().unwrap();
        assert!((tip.x - 0.6).abs() < 1e-12 && (tip.y - 0.6).abs() < 1e-12, "{tip:?}");
    }

    #[test]
    fn case_a_forms_joint() {
        let mut b = body();
        let out = b.apply_pull(Side::Left, 0.0608, &strengths(&[3]), None).unwrap();
        let PullOutcome::Buckle { pouch, angle, formed } = out else {
            panic!("{out:?}")
        };
        assert_eq!(pouch, 3);
        assert!(formed);
        assert!((angle.to_degrees() - 90.0).abs() < 0.1);
        assert_eq!(b.left.retraction_m, 0.0608);
    }

    #[test]
    fn weakest_compliant_nearest_base() {
        let mut b = body();
        let out = b.apply_pull(Side::Right, 0.01, &strengths(&[5, 2, 6]), None).unwrap();
        assert!(matches!(out, PullOutcome::Buckle { pouch: 2, .. }));
    }

    #[test]
    fn case_b_arc() {
        let mut b = body();
        let out = b.apply_pull(Side::Left, 0.043, &strengths(&[]), None).unwrap();
        assert_eq!(out, PullOutcome::Arc { bend: 1.0 });
        assert!((b.chain.arc_bend() - 1.0).abs() < 1e-12);
        assert!((b.chain.tip_pose().heading - 1.0).abs() < 1e-12);
        for s in &b.chain.segments {
            assert!((s.curvature - 1.0 / 1.2).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_pull_is_identity() {
        let mut b = body();
        let before = b.clone();
        assert_eq!(
            b.apply_pull(Side::Left, 0.0, &strengths(&[3]), None).unwrap(),
            PullOutcome::Unchanged
        );
        assert_eq!(b, before);
    }

    #[test]
    fn case_c_stores_tension() {
        let mut b = body();
        // gain so that 1 cm of pull gives 0.43 N·m, below 0.85
        let out = b.apply_pull(Side::Left, 0.01, &strengths(&[3]), Some(1000.0)).unwrap();
        assert!(matches!(out, PullOutcome::Stored { .. }));
        assert!(b.chain.joints.is_empty());
        assert_eq!(b.left.stored_pull_m, 0.01);
        // the next centimetre crosses the gate
        let out = b.apply_pull(Side::Left, 0.01, &strengths(&[3]), Some(1000.0)).unwrap();
        assert!(matches!(out, PullOutcome::Buckle { pouch: 3, .. }));
        assert_eq!(b.left.stored_pull_m, 0.0);
    }

    #[test]
    fn saturation_error() {
        let mut b = body();
        let e = b.apply_pull(Side::Left, 0.09, &strengths(&[3]), None).unwrap_err();
        assert!(matches!(e, KinematicsError::Saturated { .. }));
    }

    #[test]
    fn locked_joint_survives_later_pull() {
        let mut b = body();
        b.apply_pull(Side::Left, 0.0608, &strengths(&[3]), None).unwrap();
        b.lock_joint(3, PouchState::Jammed).unwrap();
        let a3 = b.chain.joint_angle(3);
        b.apply_pull(Side::Right, 0.0608, &strengths(&[5]), None).unwrap();
        assert_eq!(b.chain.joint_angle(3), a3);
        assert!(b.chain.joint_angle(5) < 0.0);
        // unjam pouch 3 and pull again: it moves
        b.unlock_joint(3);
        b.apply_pull(Side::Left, 0.005, &strengths(&[3]), None).unwrap();
        assert!(b.chain.joint_angle(3) > a3);
    }

    #[test]
    fn lock_requires_jammed() {
        let mut b = body();
        let e = b.lock_joint(2, PouchState::Transitional).unwrap_err();
        assert!(matches!(e, KinematicsError::NotJammed { pouch: 2, .. }));
        let before = shape_of(&b.chain);
        b.lock_joint(2, PouchState::Jammed).unwrap();
        assert_eq!(shape_of(&b.chain), before);
    }

    #[test]
    fn opposing_pull_rejected() {
        let mut b = body();
        b.apply_pull(Side::Left, 0.03, &strengths(&[3]), None).unwrap();
        let e = b.apply_pull(Side::Right, 0.01, &strengths(&[3]), None).unwrap_err();
        assert_eq!(e, KinematicsError::OpposingCable(Side::Left));
    }

    #[test]
    fn release_straightens_and_conserves() {
        let mut b = body();
        b.apply_pull(Side::Left, 0.05, &strengths(&[3]), None).unwrap();
        b.release(Side::Left, 0.02).unwrap();
        assert!((b.left.retraction_m - 0.03).abs() < 1e-12);
        assert!((b.geometric_retraction(Side::Left) - 0.03).abs() < 1e-12);
        b.lock_joint(3, PouchState::Jammed).unwrap();
        let e = b.release(Side::Left, 0.01).unwrap_err();
        assert!(matches!(e, KinematicsError::NothingToRelease { .. }));
        assert!((b.left.retraction_m - 0.03).abs() < 1e-12);
    }

    #[test]
    fn grow_one_pouch() {
        let mut b = BodyState::new(0.6, 1.2, 8, R).unwrap();
        assert_eq!(b.growth.everted_pouches(), 4);
        assert_eq!(b.grow(0.0).unwrap(), Vec::<usize>::new());
        assert_eq!(b.grow(0.15).unwrap(), vec![4]);
        assert!((b.chain.length() - 0.75).abs() < 1e-12);
        let e = b.grow(0.5).unwrap_err();
        assert!(matches!(e, KinematicsError::MaterialExhausted { .. }));
    }

    #[test]
    fn grow_after_locked_joint_keeps_prefix() {
        let mut b = BodyState::new(0.6, 1.2, 8, R).unwrap();
        b.apply_pull(Side::Left, 0.0608, &strengths(&[2])[..4], None).unwrap();
        b.lock_joint(2, PouchState::Jammed).unwrap();
        let before = shape_of(&b.chain);
        b.grow(0.2).unwrap();
        let after = shape_of(&b.chain);
        assert!(after.len() > before.len());
        assert_eq!(&after[..before.len()], &before[..]);
        // the new material continues along the tip heading
        let h = b.chain.tip_pose().heading;
        assert!((h - b.chain.joint_angle(2)).abs() < 1e-12);
    }

    #[test]
    fn partial_growth_splits_at_pouch_boundary() {
        let mut b = BodyState::new(0.5, 1.2, 8, R).unwrap();
        assert_eq!(b.growth.everted_pouches(), 3);
        assert_eq!(b.grow(0.1).unwrap(), vec![3]);
        let starts: Vec<_> = b
            .chain
            .segments
            .iter()
            .filter(|s| s.starts_pouch)
            .map(|s| s.pouch)
            .collect();
        assert_eq!(starts, vec![0, 1, 2, 3]);
    }
}
