use std::f64::consts::PI;

use jambeam_core::engine::experiment::{
    deflection_experiment, load_from_grams, standard_pressures, DeflectionSetup, JamCondition,
};
use jambeam_core::mechanics::{
    buckling_check, calibrate_coefficient, critical_moment, effective_ei, tip_deflection, uniform_sections,
    BeamSection, LoadCase, MechanicsError, MechanicsParams, MomentModel, Observation,
};
use proptest::prelude::*;

const R: f64 = 0.043;

/// Closed-form cantilever tip deflection under a tip load.
fn cantilever(f: f64, l: f64, ei: f64) -> f64 {
    f * l.powi(3) / (3.0 * ei)
}

fn ei0(params: &MechanicsParams) -> f64 {
    params.membrane_stiffness_n_per_m * PI * R.powi(3)
}

#[test]
fn oracle_unjammed_tip_load() {
    let params = MechanicsParams::default();
    let f = load_from_grams(150.0);
    let sections = uniform_sections(0.6, 4, |_| false, R, &params);
    let model = MomentModel::new(13_800.0, R, &params);
    let expected = cantilever(f, 0.6, ei0(&params));
    assert!((expected - 0.0303).abs() < 5e-5, "{expected}");
    for stations in [200, 1000] {
        let got = tip_deflection(&sections, &model, &LoadCase::tip(f, 0.6), stations).unwrap();
        assert!(
            (got - expected).abs() / expected < 0.02,
            "{stations}: {got} vs {expected}"
        );
    }
}

#[test]
fn oracle_jammed_stiffness_factor() {
    let params = MechanicsParams::default();
    let sections = uniform_sections(0.6, 4, |_| true, R, &params);
    let model = MomentModel::new(10_000.0, R, &params);
    let got = tip_deflection(&sections, &model, &LoadCase::tip(1.0, 0.6), 200).unwrap();
    let expected = cantilever(1.0, 0.6, params.kappa_ei * ei0(&params));
    assert!((got - expected).abs() / expected < 0.02);
}

#[test]
fn too_few_stations_rejected() {
    let params = MechanicsParams::default();
    let sections = uniform_sections(0.6, 4, |_| false, R, &params);
    let model = MomentModel::new(13_800.0, R, &params);
    assert_eq!(
        tip_deflection(&sections, &model, &LoadCase::tip(1.0, 0.6), 50),
        Err(MechanicsError::TooFewStations(50))
    );
}

#[test]
fn gap_in_sections_rejected() {
    let params = MechanicsParams::default();
    let mut sections = uniform_sections(0.6, 4, |_| false, R, &params);
    sections[2].span.0 += 0.01;
    let model = MomentModel::new(13_800.0, R, &params);
    assert!(matches!(
        tip_deflection(&sections, &model, &LoadCase::tip(0.1, 0.6), 200),
        Err(MechanicsError::NonTiling { .. })
    ));
}

#[test]
fn unjammed_sweep_buckles_at_low_pressure_only() {
    let rows = deflection_experiment(
        &DeflectionSetup::default(),
        &standard_pressures(),
        load_from_grams(150.0),
        JamCondition::Unjammed,
    );
    let buckled: Vec<bool> = rows.iter().map(|r| r.buckled).collect();
    assert_eq!(buckled, [true, true, false, false, false, false, false]);
    assert!(rows[..2].iter().all(|r| r.buckle_x_m == Some(0.0)));
    let d: Vec<f64> = rows[2..].iter().map(|r| r.tip_deflection_m.unwrap()).collect();
    assert!(d[0] > d[1], "strict decrease 6.9 → 8.6 kPa: {d:?}");
    assert!(d.windows(2).all(|w| w[1] <= w[0]), "{d:?}");
}

#[test]
fn jammed_sweep_never_buckles_and_is_stiffer() {
    let setup = DeflectionSetup::default();
    let f = load_from_grams(150.0);
    let jam = deflection_experiment(&setup, &standard_pressures(), f, JamCondition::Jammed);
    let unjam = deflection_experiment(&setup, &standard_pressures(), f, JamCondition::Unjammed);
    for (j, u) in jam.iter().zip(&unjam) {
        assert!(!j.buckled);
        if let Some(du) = u.tip_deflection_m {
            assert!(j.tip_deflection_m.unwrap() < du);
        }
    }
}

#[test]
fn calibration_from_sweep_brackets_default() {
    let f = load_from_grams(150.0);
    let obs: Vec<Observation> = standard_pressures()
        .into_iter()
        .enumerate()
        .map(|(i, p)| Observation {
            pressure_pa: p,
            tip_load_n: f,
            length_m: 0.6,
            buckled: i < 2,
        })
        .collect();
    let c = calibrate_coefficient(&obs, R).unwrap();
    assert!(c.lower < 0.68 && 0.68 <= c.upper, "{c:?}");
    assert_eq!(c.point, c.upper);
}

fn params_strategy() -> impl Strategy<Value = MechanicsParams> {
    (0.3..1.0f64, 1.0..4.0f64, 1.0..8.0f64, 5e3..5e4f64, 0.05..0.5f64).prop_map(|(c, kj, ke, et, f)| MechanicsParams {
        critical_coefficient: c,
        kappa_jam: kj,
        kappa_ei: ke,
        membrane_stiffness_n_per_m: et,
        wrinkle_floor: f,
        ..MechanicsParams::default()
    })
}

proptest! {
    #[test]
    fn moments_scale_with_pressure_and_cube_of_radius(p in 100.0..1e5f64, r in 0.005..0.2f64, k in 0.5..3.0f64) {
        let params = MechanicsParams::default();
        let a = MomentModel::new(p, r, &params);
        let b = MomentModel::new(p * k, r, &params);
        let c = MomentModel::new(p, r * k, &params);
        prop_assert!((b.collapse_moment() / a.collapse_moment() - k).abs() < 1e-9);
        prop_assert!((c.collapse_moment() / a.collapse_moment() - k.powi(3)).abs() < 1e-9 * k.powi(3));
        prop_assert!(a.wrinkle_moment() < a.collapse_moment());
    }

    #[test]
    fn jammed_section_dominates(params in params_strategy(), p in 1000.0..20000.0f64, m in 0.0..5.0f64) {
        let model = MomentModel::new(p, R, &params);
        let soft = BeamSection::new((0.0, 0.15), false, R, &params);
        let hard = BeamSection::new((0.0, 0.15), true, R, &params);
        prop_assert!(critical_moment(&model, &hard) >= critical_moment(&model, &soft));
        prop_assert!(effective_ei(&model, &hard, m) >= effective_ei(&model, &soft, m));
    }

    #[test]
    fn effective_ei_non_increasing_in_moment(params in params_strategy(), p in 1000.0..20000.0f64,
                                             m1 in 0.0..5.0f64, m2 in 0.0..5.0f64, jammed in any::<bool>()) {
        let model = MomentModel::new(p, R, &params);
        let s = BeamSection::new((0.0, 0.15), jammed, R, &params);
        let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
        prop_assert!(effective_ei(&model, &s, hi) <= effective_ei(&model, &s, lo) + 1e-12);
        let full = s.base_ei() * if jammed { params.kappa_ei } else { 1.0 };
        prop_assert!(effective_ei(&model, &s, hi) >= params.wrinkle_floor * full - 1e-12);
    }

    #[test]
    fn deflection_non_increasing_in_pressure(params in params_strategy(), f in 0.1..2.0f64,
                                             p1 in 2000.0..30000.0f64, dp in 0.0..10000.0f64, jammed in any::<bool>()) {
        let sections = uniform_sections(0.6, 4, |_| jammed, R, &params);
        let load = LoadCase::tip(f, 0.6);
        let lo = MomentModel::new(p1, R, &params);
        let hi = MomentModel::new(p1 + dp, R, &params);
        if let Ok(d_lo) = tip_deflection(&sections, &lo, &load, 200) {
            let d_hi = tip_deflection(&sections, &hi, &load, 200).unwrap();
            prop_assert!(d_hi <= d_lo * (1.0 + 1e-12));
        } else {
            // buckling at the higher pressure implies buckling at the lower one
            prop_assert!(buckling_check(&sections, &lo, &load).is_some());
        }
    }

    #[test]
    fn buckle_sits_at_base_of_weakest_loaded_section(params in params_strategy(), f in 0.1..3.0f64,
                                                     p in 1000.0..15000.0f64, mask in 0u8..16) {
        let sections = uniform_sections(0.6, 4, |i| mask & (1 << i) != 0, R, &params);
        let model = MomentModel::new(p, R, &params);
        let load = LoadCase::tip(f, 0.6);
        match buckling_check(&sections, &model, &load) {
            Some(b) => {
                let s = &sections[b.pouch_index];
                prop_assert_eq!(b.x_m, s.span.0);
                prop_assert!(load.moment_at(b.x_m) >= critical_moment(&model, s));
                for e in &sections[..b.pouch_index] {
                    prop_assert!(load.moment_at(e.span.0) < critical_moment(&model, e));
                }
            }
            None => {
                for s in &sections {
                    prop_assert!(load.moment_at(s.span.0) < critical_moment(&model, s));
                }
            }
        }
    }
}
