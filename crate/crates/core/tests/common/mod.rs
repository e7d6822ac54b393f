#![allow(dead_code)]

use std::path::PathBuf;

use jambeam_core::engine::{load_scenario, Scenario};

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

/// Every scenario in the corpus, sorted by file name.
pub fn corpus() -> Vec<(String, Scenario)> {
    let mut paths: Vec<_> = std::fs::read_dir(scenario_dir())
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).unwrap();
            let s = load_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, s)
        })
        .collect()
}

pub fn scenario(name: &str) -> Scenario {
    corpus()
        .into_iter()
        .find(|(n, _)| n == name)
        .unwrap_or_else(|| panic!("no scenario {name}"))
        .1
}

use jambeam_core::engine::World;
use jambeam_core::RobotSpec;

/// Pressure levels (fraction of beam pressure) used to enumerate pouch states:
/// vented, two transitional levels, equalized.
pub const LEVELS: [f64; 4] = [0.0, 0.3, 0.6, 1.0];

/// A world of `n` pouches with the given pouch pressure fractions, valves
/// settled to match.
pub fn world_with_levels(spec: RobotSpec, levels: &[f64]) -> World {
    let mut w = World::new(spec).unwrap();
    let beam = w.network.beam_pressure_pa;
    for (p, &f) in w.network.pouches.iter_mut().zip(levels) {
        p.pressure_pa = f * beam;
    }
    w.network.settle(0.0);
    w
}

pub fn small_spec(n: usize) -> RobotSpec {
    RobotSpec {
        length_m: 0.15 * n as f64,
        num_pouches: n,
        ..RobotSpec::default()
    }
}

use jambeam_core::geometry::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 0.6 m, four-pouch robot used for exhaustive planner checks.
pub fn planner_spec() -> RobotSpec {
    RobotSpec {
        length_m: 0.6,
        num_pouches: 4,
        ..RobotSpec::default()
    }
}

/// Five-angle grid: 0, ±45°, ±90°.
pub fn five_angle_grid() -> Vec<f64> {
    [0.0f64, 45.0, -45.0, 90.0, -90.0]
        .iter()
        .map(|d| d.to_radians())
        .collect()
}

/// Walk from the origin along +x, turning by `turns[k]` degrees after `lengths[k]`.
pub fn turtle(lengths: &[f64], turns: &[f64]) -> Vec<Point2> {
    let mut pts = vec![Point2::new(0.0, 0.0)];
    let mut h = 0.0f64;
    for (k, &l) in lengths.iter().enumerate() {
        let p = *pts.last().unwrap();
        pts.push(Point2::new(p.x + l * h.cos(), p.y + l * h.sin()));
        if let Some(t) = turns.get(k) {
            h += t.to_radians();
        }
    }
    pts
}

/// Ten goal polylines no longer than 0.6 m.
pub fn goal_corpus() -> Vec<(&'static str, Vec<Point2>)> {
    let arc: Vec<Point2> = (0..=30)
        .map(|k| {
            let t = 0.6 / 0.4 * k as f64 / 30.0;
            Point2::new(0.4 * t.sin(), 0.4 * (1.0 - t.cos()))
        })
        .collect();
    let s_curve: Vec<Point2> = (0..=40)
        .map(|k| {
            let x = 0.45 * k as f64 / 40.0;
            Point2::new(x, 0.06 * (2.0 * std::f64::consts::PI * x / 0.45).sin())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lens = vec![0.1; 6];
    let turns: Vec<f64> = (0..5).map(|_| rng.gen_range(-50.0..50.0)).collect();
    let wander = turtle(&lens, &turns);
    vec![
        ("straight", turtle(&[0.6], &[])),
        ("left_corner", turtle(&[0.3, 0.3], &[90.0])),
        ("right_45", turtle(&[0.15, 0.45], &[-45.0])),
        ("zigzag", turtle(&[0.15, 0.15, 0.15, 0.15], &[45.0, -90.0, 90.0])),
        ("arc", arc),
        ("s_curve", s_curve),
        ("short_bend", turtle(&[0.3, 0.1], &[60.0])),
        ("late_turn", turtle(&[0.45, 0.15], &[-60.0])),
        ("wander", wander),
        ("offset_start", {
            let mut p = turtle(&[0.2, 0.35], &[30.0]);
            for q in &mut p {
                q.y += 0.02;
            }
            p
        }),
    ]
}
