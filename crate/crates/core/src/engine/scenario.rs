//! Scenario documents: a robot spec plus an action script, as JSON.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::carriage::CarriageParams;
use crate::mechanics::MechanicsParams;
use crate::pneumatics::PneumaticParams;
use crate::script::{Action, ActionScript};

/// A schema or validation failure, located by a JSON field path.
#[derive(Debug, Error, Clone, PartialEq, Serialize)]
#[error("{path}: {message}")]
pub struct ScenarioError {
    pub path: String,
    pub message: String,
}

impl ScenarioError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Physical and model parameters of one robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotSpec {
    pub radius_m: f64,
    /// Total material length; pouches tile it.
    pub length_m: f64,
    pub num_pouches: usize,
    pub pressure_pa: f64,
    pub mechanics: MechanicsParams,
    pub carriage: CarriageParams,
    /// Initially everted length; the full material length when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub everted_length_m: Option<f64>,
    pub pneumatics: PneumaticParams,
}

impl Default for RobotSpec {
    /// The 8.6 cm diameter, 1.2 m, eight-pouch robot.
    fn default() -> Self {
        Self {
            radius_m: 0.043,
            length_m: 1.2,
            num_pouches: 8,
            pressure_pa: 6900.0,
            mechanics: MechanicsParams::default(),
            carriage: CarriageParams::default(),
            everted_length_m: None,
            pneumatics: PneumaticParams::default(),
        }
    }
}

impl RobotSpec {
    pub fn pitch(&self) -> f64 {
        self.length_m / self.num_pouches as f64
    }

    pub fn everted_length(&self) -> f64 {
        self.everted_length_m.unwrap_or(self.length_m)
    }

    pub fn cable_offset(&self) -> f64 {
        self.mechanics.cable_offset_m.unwrap_or(self.radius_m)
    }

    /// Check every quantity; the first violation is returned with its path.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        fn positive(path: &str, v: f64) -> Result<(), ScenarioError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::new(path, format!("must be positive, got {v}")))
            }
        }
        fn at_least(path: &str, v: f64, min: f64) -> Result<(), ScenarioError> {
            if v >= min && v.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::new(path, format!("must be at least {min}, got {v}")))
            }
        }
        positive("spec.radius_m", self.radius_m)?;
        positive("spec.length_m", self.length_m)?;
        if self.num_pouches == 0 {
            return Err(ScenarioError::new("spec.num_pouches", "must be at least 1"));
        }
        positive("spec.pressure_pa", self.pressure_pa)?;
        let m = &self.mechanics;
        let c = m.critical_coefficient;
        if !(c > 0.0 && c <= 1.0) {
            return Err(ScenarioError::new(
                "spec.mechanics.critical_coefficient",
                format!("must lie in (0, 1], got {c}"),
            ));
        }
        at_least("spec.mechanics.kappa_jam", m.kappa_jam, 1.0)?;
        at_least("spec.mechanics.kappa_ei", m.kappa_ei, 1.0)?;
        positive(
            "spec.mechanics.membrane_stiffness_n_per_m",
            m.membrane_stiffness_n_per_m,
        )?;
        let f = m.wrinkle_floor;
        if !(f > 0.0 && f < 1.0) {
            return Err(ScenarioError::new(
                "spec.mechanics.wrinkle_floor",
                format!("must lie in (0, 1), got {f}"),
            ));
        }
        if let Some(r) = m.cable_offset_m {
            positive("spec.mechanics.cable_offset_m", r)?;
        }
        if let Some(g) = m.tension_gain_n_per_m {
            positive("spec.mechanics.tension_gain_n_per_m", g)?;
        }
        positive("spec.carriage.speed_m_per_s", self.carriage.speed_m_per_s)?;
        at_least("spec.carriage.dwell_s", self.carriage.dwell_s, 0.0)?;
        if let Some(e) = self.everted_length_m {
            at_least("spec.everted_length_m", e, 0.0)?;
            if e > self.length_m {
                return Err(ScenarioError::new(
                    "spec.everted_length_m",
                    format!("exceeds material length {}", self.length_m),
                ));
            }
        }
        let p = &self.pneumatics;
        at_least("spec.pneumatics.seal_threshold_pa", p.seal_threshold_pa, 0.0)?;
        positive("spec.pneumatics.vent_time_constant_s", p.vent_time_constant_s)?;
        if !(p.jam_fraction > 0.0 && p.jam_fraction < 0.5) {
            return Err(ScenarioError::new(
                "spec.pneumatics.jam_fraction",
                format!("must lie in (0, 0.5), got {}", p.jam_fraction),
            ));
        }
        positive("spec.pneumatics.magnet_range_m", p.magnet_range_m)?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub spec: RobotSpec,
    #[serde(default)]
    pub script: ActionScript,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.spec.validate()?;
        for (i, a) in self.script.iter().enumerate() {
            validate_action(a, &self.spec, &format!("script[{i}]"))?;
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Static checks on one action: indices in range, quantities non-negative.
pub fn validate_action(action: &Action, spec: &RobotSpec, prefix: &str) -> Result<(), ScenarioError> {
    let field = |name: &str| format!("{prefix}.{name}");
    if let Some(p) = action.pouch() {
        if p >= spec.num_pouches {
            return Err(ScenarioError::new(
                field("pouch"),
                format!(
                    "{} refers to pouch {p} but the robot has {} pouches",
                    action.kind(),
                    spec.num_pouches
                ),
            ));
        }
    }
    let nonneg = |name: &str, v: f64| {
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ScenarioError::new(
                field(name),
                format!("{} must be non-negative, got {v}", action.kind()),
            ))
        }
    };
    match *action {
        Action::MoveCarriage { x_m } => nonneg("x_m", x_m),
        Action::Dwell { seconds } => nonneg("seconds", seconds),
        Action::PullCable { length_m, .. } | Action::ReleaseCable { length_m, .. } | Action::Grow { length_m } => {
            nonneg("length_m", length_m)
        }
        Action::SetPressure { pressure_pa } => {
            if pressure_pa > 0.0 && pressure_pa.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::new(
                    field("pressure_pa"),
                    format!("set_pressure must be positive, got {pressure_pa}"),
                ))
            }
        }
        _ => Ok(()),
    }
}

/// Parse and validate a scenario document.
pub fn load_scenario(document: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::new(
            if path == "." { String::new() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Parse and validate a single action document against `spec`.
pub fn parse_action(document: &str, spec: &RobotSpec) -> Result<Action, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let action: Action = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "action".to_string()
        } else {
            format!("action.{path}")
        };
        ScenarioError::new(path, e.into_inner().to_string())
    })?;
    validate_action(&action, spec, "action")?;
    Ok(action)
}
