mod common;

use jambeam_core::engine::{expand_script, load_scenario, run, EngineError, PouchStatus, RobotSpec, Trace, World};
use jambeam_core::kinematics::shape_of;
use jambeam_core::pneumatics::SettleMode;
use jambeam_core::{Action, Side};
use proptest::prelude::*;

#[test]
fn corpus_runs_and_serializes() {
    for (name, s) in common::corpus() {
        let t = run(&s.spec, &s.script).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(t.snapshots().count(), s.script.len() + 1, "{name}");
        let back = Trace::from_ndjson(&t.to_ndjson()).unwrap();
        assert_eq!(back, t, "{name}");
        assert_eq!(t.actions(), s.script, "{name}");
        let doc = s.to_json_pretty();
        assert_eq!(load_scenario(&doc).unwrap(), s);
    }
}

#[test]
fn three_buckle_script_keeps_earlier_angles() {
    let s = common::scenario("three_buckles");
    let t = run(&s.spec, &s.script).unwrap();
    let last = t.final_snapshot().unwrap();
    let signs: Vec<f64> = last.joints.iter().map(|j| j.angle_rad.signum()).collect();
    assert_eq!(signs, vec![1.0, -1.0, 1.0]);
    assert!(last.joints.iter().all(|j| j.locked));
    for j in &last.joints {
        assert!((j.angle_rad.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }
}

#[test]
fn timestamps_never_decrease() {
    for (name, s) in common::corpus() {
        let t = run(&s.spec, &s.script).unwrap();
        let times: Vec<f64> = t.records.iter().map(|r| r.time_s()).collect();
        assert!(times.windows(2).all(|w| w[1] >= w[0]), "{name}");
    }
}

/// End time recomputed from the flat primitive list.
fn accounted_time(spec: &RobotSpec, script: &[Action]) -> f64 {
    let flat = expand_script(spec, script).unwrap();
    let mut x = 0.0f64;
    let mut t = 0.0;
    for a in flat {
        match a {
            Action::MoveCarriage { x_m } => {
                t += (x_m - x).abs() / spec.carriage.speed_m_per_s;
                x = x_m;
            }
            Action::Dwell { seconds } => t += seconds,
            _ => {}
        }
    }
    t
}

#[test]
fn timeline_accounting() {
    for (name, s) in common::corpus() {
        let t = run(&s.spec, &s.script).unwrap();
        let expected = accounted_time(&s.spec, &s.script);
        assert!(
            (t.end_time() - expected).abs() < 1e-9,
            "{name}: {} vs {expected}",
            t.end_time()
        );
    }
}

#[test]
fn snapshot_shape_matches_chain() {
    for (_, s) in common::corpus() {
        let t = run(&s.spec, &s.script).unwrap();
        for snap in t.snapshots() {
            assert_eq!(snap.shape, shape_of(&snap.chain));
        }
    }
}

#[test]
fn replaying_trace_actions_reproduces_snapshots() {
    for (_, s) in common::corpus() {
        let t = run(&s.spec, &s.script).unwrap();
        let again = run(&s.spec, &t.actions()).unwrap();
        let a: Vec<_> = t.snapshots().collect();
        let b: Vec<_> = again.snapshots().collect();
        assert_eq!(a, b);
    }
}

#[test]
fn errors_carry_action_index() {
    let spec = RobotSpec {
        everted_length_m: Some(0.3),
        ..RobotSpec::default()
    };
    let script = vec![Action::UnjamPouch { pouch: 1 }, Action::JamPouch { pouch: 5 }];
    let e = run(&spec, &script).unwrap_err();
    assert_eq!(e.index, 1);
    assert_eq!(e.kind, "jam_pouch");
    assert!(matches!(e.source, EngineError::Pneumatic(_)));
}

#[test]
fn failed_step_leaves_world_unchanged() {
    let mut w = World::new(RobotSpec::default()).unwrap();
    w.step(0, &Action::UnjamPouch { pouch: 3 }).unwrap();
    let before = w.clone();
    // saturating pull: more than the hinge can take
    assert!(w
        .step(
            1,
            &Action::PullCable {
                side: Side::Left,
                length_m: 0.2
            }
        )
        .is_err());
    assert_eq!(w, before);
}

#[derive(Clone, Debug)]
enum Step {
    Jam(usize),
    Unjam(usize),
    Pull(bool, f64),
    Release(bool, f64),
    Grow(f64),
    Pressure(f64),
    Dwell(f64),
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        3 => (0..8usize).prop_map(Step::Jam),
        3 => (0..8usize).prop_map(Step::Unjam),
        3 => (any::<bool>(), 0.0..0.04f64).prop_map(|(l, d)| Step::Pull(l, d)),
        1 => (any::<bool>(), 0.0..0.02f64).prop_map(|(l, d)| Step::Release(l, d)),
        1 => (0.0..0.3f64).prop_map(Step::Grow),
        1 => (3000.0..14000.0f64).prop_map(Step::Pressure),
        1 => (0.0..3.0f64).prop_map(Step::Dwell),
    ]
}

fn to_action(s: &Step) -> Action {
    let side = |l: bool| if l { Side::Left } else { Side::Right };
    match *s {
        Step::Jam(pouch) => Action::JamPouch { pouch },
        Step::Unjam(pouch) => Action::UnjamPouch { pouch },
        Step::Pull(l, d) => Action::PullCable {
            side: side(l),
            length_m: d,
        },
        Step::Release(l, d) => Action::ReleaseCable {
            side: side(l),
            length_m: d,
        },
        Step::Grow(d) => Action::Grow { length_m: d },
        Step::Pressure(p) => Action::SetPressure { pressure_pa: p },
        Step::Dwell(s) => Action::Dwell { seconds: s },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn macro_soundness_and_determinism(steps in prop::collection::vec(step(), 0..25), first_order in any::<bool>()) {
        let mut spec = RobotSpec { everted_length_m: Some(0.6), ..RobotSpec::default() };
        if first_order {
            spec.pneumatics.mode = SettleMode::FirstOrder;
        }
        let mut world = World::new(spec.clone()).unwrap();
        let mut accepted = Vec::new();
        let mut everted = world.body.growth.everted_length_m;
        for s in &steps {
            let a = to_action(s);
            let before = world.clone();
            match world.step(accepted.len(), &a) {
                Ok(_) => {
                    match a {
                        Action::JamPouch { pouch } => {
                            prop_assert_eq!(world.snapshot().pouch_states[pouch], PouchStatus::Jammed);
                        }
                        Action::UnjamPouch { pouch } => {
                            prop_assert_eq!(world.snapshot().pouch_states[pouch], PouchStatus::Compliant);
                        }
                        _ => {}
                    }
                    accepted.push(a);
                }
                Err(_) => prop_assert_eq!(&world, &before),
            }
            prop_assert!(world.body.growth.everted_length_m >= everted);
            everted = world.body.growth.everted_length_m;
            prop_assert!(world.network.loose_under_gradient().is_empty());
        }
        let a = run(&spec, &accepted).unwrap().to_ndjson();
        let b = run(&spec, &accepted).unwrap().to_ndjson();
        prop_assert_eq!(a, b);
    }
}
