//! Bending mechanics of an inflated membrane beam with jammable sections.
//!
//! Characteristic moments follow the classical thin-membrane results:
//! wrinkling starts at `(π/2)·p·r³` and the section collapses at `π·p·r³`.
//! The effective buckling moment is `c·π·p·r³`, with `c` calibrated from
//! buckle/no-buckle observations. Jamming multiplies the buckling moment by
//! `kappa_jam` and the bending stiffness by `kappa_ei`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GRAVITY: f64 = 9.81;

/// Lowest station count accepted by [`tip_deflection`].
pub const MIN_STATIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechanicsError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("configuration buckles at x = {x_m} m (pouch {pouch_index})")]
    Buckled { x_m: f64, pouch_index: usize },
    #[error("sections do not tile [0, {length_m}]: {reason}")]
    NonTiling { length_m: f64, reason: String },
    #[error("need at least {MIN_STATIONS} integration stations, got {0}")]
    TooFewStations(usize),
    #[error("no observations")]
    NoObservations,
    #[error("inconsistent observations: lower bound {lower} exceeds upper bound {upper}")]
    EmptyInterval { lower: f64, upper: f64 },
}

/// Tunable constants of the bending model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanicsParams {
    pub critical_coefficient: f64,
    pub kappa_jam: f64,
    pub kappa_ei: f64,
    /// Wall modulus times thickness (N/m).
    pub membrane_stiffness_n_per_m: f64,
    pub wrinkle_floor: f64,
    /// Cable guide offset from the beam axis; defaults to the beam radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cable_offset_m: Option<f64>,
    /// Cable tension per metre of commanded pull. Absent means the spools are
    /// displacement controlled and always reach the weakest pouch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tension_gain_n_per_m: Option<f64>,
}

impl Default for MechanicsParams {
    fn default() -> Self {
        Self {
            critical_coefficient: 0.68,
            kappa_jam: 2.0,
            kappa_ei: 5.0,
            membrane_stiffness_n_per_m: 1.4e4,
            wrinkle_floor: 0.1,
            cable_offset_m: None,
            tension_gain_n_per_m: None,
        }
    }
}

/// Wrinkling and collapse moments (N·m) of a pressurized tube.
pub fn characteristic_moments(pressure_pa: f64, radius_m: f64) -> Result<(f64, f64), MechanicsError> {
    if !(radius_m > 0.0) {
        return Err(MechanicsError::NonPositiveRadius(radius_m));
    }
    let collapse = PI * pressure_pa * radius_m.powi(3);
    Ok((collapse / 2.0, collapse))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentModel {
    pub pressure_pa: f64,
    pub radius_m: f64,
    pub critical_coefficient: f64,
    pub wrinkle_floor: f64,
}

impl MomentModel {
    pub fn new(pressure_pa: f64, radius_m: f64, params: &MechanicsParams) -> Self {
        Self {
            pressure_pa,
            radius_m,
            critical_coefficient: params.critical_coefficient,
            wrinkle_floor: params.wrinkle_floor,
        }
    }

    pub fn collapse_moment(&self) -> f64 {
        PI * self.pressure_pa * self.radius_m.powi(3)
    }

    pub fn wrinkle_moment(&self) -> f64 {
        self.collapse_moment() / 2.0
    }
}

/// An axial piece of the beam, jammed or not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSection {
    pub span: (f64, f64),
    pub jammed: bool,
    pub radius_m: f64,
    pub membrane_stiffness_n_per_m: f64,
    pub kappa_ei: f64,
    pub kappa_jam: f64,
}

impl BeamSection {
    pub fn new(span: (f64, f64), jammed: bool, radius_m: f64, params: &MechanicsParams) -> Self {
        Self {
            span,
            jammed,
            radius_m,
            membrane_stiffness_n_per_m: params.membrane_stiffness_n_per_m,
            kappa_ei: params.kappa_ei,
            kappa_jam: params.kappa_jam,
        }
    }

    /// Unjammed bending stiffness `Et·π·r³`.
    pub fn base_ei(&self) -> f64 {
        self.membrane_stiffness_n_per_m * PI * self.radius_m.powi(3)
    }

    fn strength_factor(&self) -> f64 {
        if self.jammed {
            self.kappa_jam
        } else {
            1.0
        }
    }

    fn stiffness_factor(&self) -> f64 {
        if self.jammed {
            self.kappa_ei
        } else {
            1.0
        }
    }
}

/// `n` equal sections tiling `[0, length_m]`.
pub fn uniform_sections(
    length_m: f64,
    n: usize,
    jammed: impl Fn(usize) -> bool,
    radius_m: f64,
    params: &MechanicsParams,
) -> Vec<BeamSection> {
    let pitch = length_m / n as f64;
    (0..n)
        .map(|i| {
            let x1 = if i + 1 == n { length_m } else { (i + 1) as f64 * pitch };
            BeamSection::new((i as f64 * pitch, x1), jammed(i), radius_m, params)
        })
        .collect()
}

/// Moment at which `section` buckles.
pub fn critical_moment(model: &MomentModel, section: &BeamSection) -> f64 {
    section.strength_factor() * model.critical_coefficient * PI * model.pressure_pa * section.radius_m.powi(3)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    pub tip_load_n: f64,
    pub beam_length_m: f64,
    pub include_self_weight: bool,
    pub weight_per_length_n_per_m: f64,
}

impl LoadCase {
    pub fn tip(tip_load_n: f64, beam_length_m: f64) -> Self {
        Self {
            tip_load_n,
            beam_length_m,
            include_self_weight: false,
            weight_per_length_n_per_m: 0.0,
        }
    }

    /// Bending moment of the cantilever at distance `x` from the clamp.
    pub fn moment_at(&self, x: f64) -> f64 {
        let arm = (self.beam_length_m - x).max(0.0);
        let mut m = self.tip_load_n * arm;
        if self.include_self_weight {
            m += 0.5 * self.weight_per_length_n_per_m * arm * arm;
        }
        m
    }
}

/// The cantilever moment profile as a callable.
pub fn moment_profile(load: &LoadCase) -> impl Fn(f64) -> f64 + '_ {
    move |x| load.moment_at(x)
}

/// Where a configuration buckles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Buckle {
    pub x_m: f64,
    pub pouch_index: usize,
}

fn check_tiling(sections: &[BeamSection], length_m: f64) -> Result<(), MechanicsError> {
    let fail = |reason: String| MechanicsError::NonTiling { length_m, reason };
    let tol = 1e-9 * length_m.max(1.0);
    let first = sections.first().ok_or_else(|| fail("no sections".into()))?;
    if first.span.0.abs() > tol {
        return Err(fail(format!("first section starts at {}", first.span.0)));
    }
    for (i, s) in sections.iter().enumerate() {
        if !(s.span.1 > s.span.0) {
            return Err(fail(format!("section {i} is empty or reversed")));
        }
        if let Some(next) = sections.get(i + 1) {
            if (next.span.0 - s.span.1).abs() > tol {
                return Err(fail(format!("gap or overlap after section {i}")));
            }
        }
    }
    let end = sections.last().unwrap().span.1;
    if (end - length_m).abs() > tol {
        return Err(fail(format!("last section ends at {end}")));
    }
    Ok(())
}

/// Smallest `x` where the applied moment reaches the local buckling moment.
///
/// Sections are half-open `[x0, x1)`, so a boundary belongs to the section
/// toward the tip. The moment is non-increasing in `x`, so each section only
/// needs checking at its base end.
pub fn buckling_check(sections: &[BeamSection], model: &MomentModel, load: &LoadCase) -> Option<Buckle> {
    sections.iter().enumerate().find_map(|(i, s)| {
        let x = s.span.0.max(0.0);
        (load.moment_at(x) >= critical_moment(model, s)).then_some(Buckle { x_m: x, pouch_index: i })
    })
}

/// Effective bending stiffness of `section` carrying moment `m`.
///
/// Full stiffness below the (scaled) wrinkling moment, falling linearly to
/// `wrinkle_floor` of it at the section's buckling moment.
pub fn effective_ei(model: &MomentModel, section: &BeamSection, m: f64) -> f64 {
    let full = section.base_ei() * section.stiffness_factor();
    let m_wrinkle = section.strength_factor() * model.wrinkle_moment();
    let m_crit = critical_moment(model, section);
    let floor = model.wrinkle_floor;
    let m = m.abs();
    let factor = if m_crit <= m_wrinkle {
        if m < m_crit {
            1.0
        } else {
            floor
        }
    } else if m <= m_wrinkle {
        1.0
    } else if m >= m_crit {
        floor
    } else {
        1.0 - (1.0 - floor) * (m - m_wrinkle) / (m_crit - m_wrinkle)
    };
    full * factor
}

/// Small-deflection tip deflection of the clamped beam.
///
/// Curvature `M/EI_eff` is integrated twice with the trapezoidal rule on
/// `stations` uniform intervals.
pub fn tip_deflection(
    sections: &[BeamSection],
    model: &MomentModel,
    load: &LoadCase,
    stations: usize,
) -> Result<f64, MechanicsError> {
    if stations < MIN_STATIONS {
        return Err(MechanicsError::TooFewStations(stations));
    }
    let length = load.beam_length_m;
    check_tiling(sections, length)?;
    if let Some(b) = buckling_check(sections, model, load) {
        return Err(MechanicsError::Buckled {
            x_m: b.x_m,
            pouch_index: b.pouch_index,
        });
    }
    let h = length / stations as f64;
    let mut sec = 0usize;
    let curvature = |x: f64, sec: &mut usize| {
        while *sec + 1 < sections.len() && x >= sections[*sec].span.1 {
            *sec += 1;
        }
        let m = load.moment_at(x);
        m / effective_ei(model, &sections[*sec], m)
    };
    let mut k_prev = curvature(0.0, &mut sec);
    let mut slope = 0.0;
    let mut defl = 0.0;
    for i in 1..=stations {
        let x = if i == stations { length } else { i as f64 * h };
        let k = curvature(x, &mut sec);
        let slope_next = slope + 0.5 * h * (k_prev + k);
        defl += 0.5 * h * (slope + slope_next);
        slope = slope_next;
        k_prev = k;
    }
    Ok(defl)
}

/// One buckle/no-buckle observation of a cantilever with a tip load.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub pressure_pa: f64,
    pub tip_load_n: f64,
    pub length_m: f64,
    pub buckled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub lower: f64,
    pub upper: f64,
    /// The upper bound: buckling is taken as marginal at the highest
    /// pressure that buckled.
    pub point: f64,
}

/// Bound the critical coefficient from observations on a beam of radius `radius_m`.
///
/// A buckle means `c ≤ M/(π·p·r³)`; surviving means `c ≥ M/(π·p·r³)`.
pub fn calibrate_coefficient(observations: &[Observation], radius_m: f64) -> Result<Calibration, MechanicsError> {
    if observations.is_empty() {
        return Err(MechanicsError::NoObservations);
    }
    if !(radius_m > 0.0) {
        return Err(MechanicsError::NonPositiveRadius(radius_m));
    }
    let mut lower = 0.0f64;
    let mut upper = 1.0f64;
    for o in observations {
        let ratio = o.tip_load_n * o.length_m / (PI * o.pressure_pa * radius_m.powi(3));
        if o.buckled {
            upper = upper.min(ratio);
        } else {
            lower = lower.max(ratio);
        }
    }
    if lower > upper {
        return Err(MechanicsError::EmptyInterval { lower, upper });
    }
    Ok(Calibration {
        lower,
        upper,
        point: upper,
    })
}
