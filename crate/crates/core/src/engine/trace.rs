//! Trace records and state snapshots.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::kinematics::JointChain;
use crate::pneumatics::{EventRecord, PouchState};
use crate::script::Action;

/// Jam status as reported in snapshots, including pouches still inside.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PouchStatus {
    Jammed,
    Compliant,
    Transitional,
    NotEverted,
}

impl From<Option<PouchState>> for PouchStatus {
    fn from(s: Option<PouchState>) -> Self {
        match s {
            Some(PouchState::Jammed) => PouchStatus::Jammed,
            Some(PouchState::Compliant) => PouchStatus::Compliant,
            Some(PouchState::Transitional) => PouchStatus::Transitional,
            None => PouchStatus::NotEverted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointRecord {
    pub pouch: usize,
    pub angle_rad: f64,
    pub locked: bool,
}

/// Full observable state after an action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time_s: f64,
    pub carriage_x_m: f64,
    pub pressure_pa: f64,
    pub everted_length_m: f64,
    pub pouch_states: Vec<PouchStatus>,
    pub pouch_pressures_pa: Vec<f64>,
    pub joints: Vec<JointRecord>,
    pub left_retraction_m: f64,
    pub right_retraction_m: f64,
    pub chain: JointChain,
    pub shape: Vec<Point2>,
}

/// One line of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TraceRecord {
    /// A script action; `step` is set for primitives expanded from a macro.
    Action {
        time_s: f64,
        index: usize,
        step: Option<usize>,
        action: Action,
    },
    Pneumatic(EventRecord),
    CarriageLeg {
        time_s: f64,
        from_m: f64,
        to_m: f64,
        travel_s: f64,
    },
    Buckle {
        time_s: f64,
        pouch_index: usize,
        x_m: f64,
        angle_rad: f64,
    },
    Arc {
        time_s: f64,
        bend_rad: f64,
    },
    JointLocked {
        time_s: f64,
        pouch_index: usize,
        angle_rad: f64,
    },
    JointUnlocked {
        time_s: f64,
        pouch_index: usize,
        angle_rad: f64,
    },
    Grown {
        time_s: f64,
        everted_length_m: f64,
        new_pouches: Vec<usize>,
    },
    Snapshot {
        /// Index of the script action just completed; absent for the initial state.
        after_action: Option<usize>,
        snapshot: Snapshot,
    },
}

impl TraceRecord {
    pub fn time_s(&self) -> f64 {
        match self {
            TraceRecord::Action { time_s, .. }
            | TraceRecord::CarriageLeg { time_s, .. }
            | TraceRecord::Buckle { time_s, .. }
            | TraceRecord::Arc { time_s, .. }
            | TraceRecord::JointLocked { time_s, .. }
            | TraceRecord::JointUnlocked { time_s, .. }
            | TraceRecord::Grown { time_s, .. } => *time_s,
            TraceRecord::Pneumatic(e) => e.time_s,
            TraceRecord::Snapshot { snapshot, .. } => snapshot.time_s,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn snapshots(&self) -> impl Iterator<Item = &Snapshot> {
        self.records.iter().filter_map(|r| match r {
            TraceRecord::Snapshot { snapshot, .. } => Some(snapshot),
            _ => None,
        })
    }

    /// Top-level script actions, in order.
    pub fn actions(&self) -> Vec<Action> {
        self.records
            .iter()
            .filter_map(|r| match r {
                TraceRecord::Action { step: None, action, .. } => Some(action.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn end_time(&self) -> f64 {
        self.records.last().map_or(0.0, TraceRecord::time_s)
    }

    pub fn final_snapshot(&self) -> Option<&Snapshot> {
        self.snapshots().last()
    }

    /// Newline-delimited JSON, one record per line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> serde_json::Result<Trace> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Trace { records })
    }
}

/// Polyline as `x_m,y_m` CSV.
pub fn shape_csv(points: &[Point2]) -> String {
    let mut out = String::from("x_m,y_m\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    out
}
