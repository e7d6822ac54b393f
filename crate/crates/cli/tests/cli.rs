use std::path::PathBuf;
use std::process::{Command, Output};

fn jambeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jambeam"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/scenarios")
        .join(format!("{name}.json"))
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_writes_trace_and_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.ndjson");
    let shapes = dir.path().join("shapes.csv");
    let out = stdout(&jambeam(&[
        "simulate",
        &scenario("three_buckles"),
        "--trace",
        trace.to_str().unwrap(),
        "--shapes",
        shapes.to_str().unwrap(),
    ]));
    assert!(out.contains("joint 2: +90.000 deg (locked)"), "{out}");
    assert!(out.contains("joint 4: -90.000 deg (locked)"));
    let text = std::fs::read_to_string(&trace).unwrap();
    let parsed = jambeam_core::Trace::from_ndjson(&text).unwrap();
    assert_eq!(parsed.snapshots().count(), 10);
    let csv = std::fs::read_to_string(&shapes).unwrap();
    assert!(csv.starts_with("snapshot,time_s,x_m,y_m\n"));
}

#[test]
fn simulate_reports_bad_scenario_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"spec": {}, "script": [{"action": "jam_pouch", "pouch": 9}]}"#).unwrap();
    let o = jambeam(&["simulate", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("script[0].pouch"), "{err}");
}

#[test]
fn deflection_sweep_csv() {
    let out = stdout(&jambeam(&["experiment", "deflection"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "pressure_pa,state,tip_deflection_m,buckled,buckle_x_m");
    assert_eq!(lines.len(), 8);
    assert!(lines[1].contains(",unjammed,,true,0"));
    assert!(lines[3].contains(",false,"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jam.csv");
    stdout(&jambeam(&[
        "experiment",
        "deflection",
        "--jammed",
        "--pressures",
        "3.4:13.8:1.7",
        "--load-g",
        "150",
        "--csv",
        path.to_str().unwrap(),
    ]));
    let table = std::fs::read_to_string(path).unwrap();
    assert_eq!(table.lines().count(), 8);
    assert!(table
        .lines()
        .skip(1)
        .all(|l| l.contains(",jammed,") && l.contains(",false,")));
}

#[test]
fn plan_emits_replayable_script() {
    let dir = tempfile::tempdir().unwrap();
    let goal = dir.path().join("goal.csv");
    std::fs::write(&goal, "x_m,y_m\n0,0\n0.45,0\n0.45,0.75\n").unwrap();
    let script = dir.path().join("script.json");
    let out = stdout(&jambeam(&[
        "plan",
        goal.to_str().unwrap(),
        "--grid-deg",
        "0,45,-45,90,-90",
        "--script-out",
        script.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["angles_deg"][3], 90.0);
    assert_eq!(v["script"].as_array().unwrap().len(), 3);
    let sim = stdout(&jambeam(&["simulate", script.to_str().unwrap()]));
    assert!(sim.contains("joint 3: +90.000 deg (locked)"), "{sim}");
}

#[test]
fn plan_rejects_overlong_goal() {
    let dir = tempfile::tempdir().unwrap();
    let goal = dir.path().join("goal.csv");
    std::fs::write(&goal, "0,0\n10,0\n").unwrap();
    let o = jambeam(&["plan", goal.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds available material"));
}
