//! Primitive and macro actions that drive the robot.

use serde::{Deserialize, Serialize};

/// Which of a pouch's two valves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValveRole {
    /// Beam interior to pouch.
    Inner,
    /// Pouch to atmosphere.
    Outer,
}

/// Cable side. Left bends are positive (counter-clockwise).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// One step of an action script.
///
/// `JamPouch` and `UnjamPouch` are macros; the engine expands them into
/// carriage moves, a magnet hold, a settle dwell and a release.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum Action {
    MoveCarriage { x_m: f64 },
    HoldMagnet { pouch: usize, valve: ValveRole },
    ReleaseMagnet,
    Dwell { seconds: f64 },
    PullCable { side: Side, length_m: f64 },
    ReleaseCable { side: Side, length_m: f64 },
    Grow { length_m: f64 },
    SetPressure { pressure_pa: f64 },
    JamPouch { pouch: usize },
    UnjamPouch { pouch: usize },
}

impl Action {
    pub fn is_macro(&self) -> bool {
        matches!(self, Action::JamPouch { .. } | Action::UnjamPouch { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Action::MoveCarriage { .. } => "move_carriage",
            Action::HoldMagnet { .. } => "hold_magnet",
            Action::ReleaseMagnet => "release_magnet",
            Action::Dwell { .. } => "dwell",
            Action::PullCable { .. } => "pull_cable",
            Action::ReleaseCable { .. } => "release_cable",
            Action::Grow { .. } => "grow",
            Action::SetPressure { .. } => "set_pressure",
            Action::JamPouch { .. } => "jam_pouch",
            Action::UnjamPouch { .. } => "unjam_pouch",
        }
    }

    /// Pouch index referenced by the action, if any.
    pub fn pouch(&self) -> Option<usize> {
        match *self {
            Action::HoldMagnet { pouch, .. } | Action::JamPouch { pouch } | Action::UnjamPouch { pouch } => Some(pouch),
            _ => None,
        }
    }
}

pub type ActionScript = Vec<Action>;
