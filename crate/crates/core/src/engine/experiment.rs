//! Transverse tip-load deflection sweep of a cantilevered robot.

use serde::{Deserialize, Serialize};

use crate::mechanics::{
    buckling_check, tip_deflection, uniform_sections, LoadCase, MechanicsParams, MomentModel, GRAVITY,
};

pub const PA_PER_PSI: f64 = 6_894.757_293_168_361;

/// Stations used for the sweep integrals.
pub const SWEEP_STATIONS: usize = 1000;

/// 0.5 psi to 2.0 psi in 0.25 psi steps (3.4 kPa to 13.8 kPa).
pub fn standard_pressures() -> Vec<f64> {
    (0..7).map(|k| (0.5 + 0.25 * k as f64) * PA_PER_PSI).collect()
}

/// Tip load of a hanging mass.
pub fn load_from_grams(grams: f64) -> f64 {
    grams / 1000.0 * GRAVITY
}

/// Cantilever used for the sweep: 60 cm long with four pouches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeflectionSetup {
    pub radius_m: f64,
    pub length_m: f64,
    pub num_pouches: usize,
    pub mechanics: MechanicsParams,
    pub include_self_weight: bool,
    pub weight_per_length_n_per_m: f64,
}

impl Default for DeflectionSetup {
    fn default() -> Self {
        Self {
            radius_m: 0.043,
            length_m: 0.6,
            num_pouches: 4,
            mechanics: MechanicsParams::default(),
            include_self_weight: false,
            weight_per_length_n_per_m: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JamCondition {
    Jammed,
    Unjammed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeflectionRow {
    pub pressure_pa: f64,
    pub state: JamCondition,
    pub tip_deflection_m: Option<f64>,
    pub buckled: bool,
    pub buckle_x_m: Option<f64>,
}

/// One row per pressure: either a tip deflection or the buckle location.
pub fn deflection_experiment(
    setup: &DeflectionSetup,
    pressures: &[f64],
    load_n: f64,
    state: JamCondition,
) -> Vec<DeflectionRow> {
    let jammed = state == JamCondition::Jammed;
    let sections = uniform_sections(
        setup.length_m,
        setup.num_pouches,
        |_| jammed,
        setup.radius_m,
        &setup.mechanics,
    );
    let load = LoadCase {
        tip_load_n: load_n,
        beam_length_m: setup.length_m,
        include_self_weight: setup.include_self_weight,
        weight_per_length_n_per_m: setup.weight_per_length_n_per_m,
    };
    pressures
        .iter()
        .map(|&p| {
            let model = MomentModel::new(p, setup.radius_m, &setup.mechanics);
            match buckling_check(&sections, &model, &load) {
                Some(b) => DeflectionRow {
                    pressure_pa: p,
                    state,
                    tip_deflection_m: None,
                    buckled: true,
                    buckle_x_m: Some(b.x_m),
                },
                None => DeflectionRow {
                    pressure_pa: p,
                    state,
                    tip_deflection_m: Some(
                        tip_deflection(&sections, &model, &load, SWEEP_STATIONS)
                            .expect("sections tile the beam and no buckle was found"),
                    ),
                    buckled: false,
                    buckle_x_m: None,
                },
            }
        })
        .collect()
}

/// `pressure_pa,state,tip_deflection_m,buckled,buckle_x_m`; absent values are empty.
pub fn deflection_csv(rows: &[DeflectionRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pressure_pa", "state", "tip_deflection_m", "buckled", "buckle_x_m"])
        .expect("in-memory write");
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let state = match r.state {
            JamCondition::Jammed => "jammed",
            JamCondition::Unjammed => "unjammed",
        };
        w.write_record([
            r.pressure_pa.to_string(),
            state.to_string(),
            opt(r.tip_deflection_m),
            r.buckled.to_string(),
            opt(r.buckle_x_m),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Parse `a:b:step` (kPa) into pascals, inclusive of `b` within half a step.
pub fn parse_pressure_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err(format!("expected a:b:step, got {spec:?}"));
    };
    if !(step > 0.0) || !(a > 0.0) || b < a {
        return Err(format!("need 0 < a <= b and step > 0, got {spec:?}"));
    }
    let n = ((b - a) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|k| (a + step * k as f64) * 1000.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_sweep_labels() {
        let kpa: Vec<f64> = standard_pressures()
            .iter()
            .map(|p| (p / 100.0).round() / 10.0)
            .collect();
        assert_eq!(kpa, vec![3.4, 5.2, 6.9, 8.6, 10.3, 12.1, 13.8]);
    }

    #[test]
    fn empty_sweep() {
        let rows = deflection_experiment(&DeflectionSetup::default(), &[], 1.0, JamCondition::Jammed);
        assert!(rows.is_empty());
        assert_eq!(
            deflection_csv(&rows),
            "pressure_pa,state,tip_deflection_m,buckled,buckle_x_m\n"
        );
    }

    #[test]
    fn csv_rows() {
        let rows = deflection_experiment(
            &DeflectionSetup::default(),
            &standard_pressures()[..3],
            load_from_grams(150.0),
            JamCondition::Unjammed,
        );
        let csv = deflection_csv(&rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",unjammed,,true,0"), "{}", lines[1]);
        assert!(lines[3].contains(",unjammed,0."), "{}", lines[3]);
    }

    #[test]
    fn pressure_range_parsing() {
        let p = parse_pressure_range("3.4:13.8:1.7").unwrap();
        assert_eq!(p.len(), 7);
        assert!((p[6] - 13600.0).abs() < 1e-6);
        assert!(parse_pressure_range("1:2").is_err());
        assert!(parse_pressure_range("2:1:0.5").is_err());
    }
}
