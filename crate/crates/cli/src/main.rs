use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use jambeam_core::engine::experiment::{
    deflection_csv, deflection_experiment, load_from_grams, parse_pressure_range, standard_pressures, DeflectionSetup,
    JamCondition,
};
use jambeam_core::engine::{load_scenario, run, PouchStatus, Scenario, Trace};
use jambeam_core::planner::{
    compile_actions, default_angle_grid, fit_joint_angles, predicted_shape, read_goal_csv, GoalShape,
};
use jambeam_core::RobotSpec;

#[derive(Parser)]
#[command(
    name = "jambeam",
    version,
    about = "Inflated beam robot simulator with layer-jamming pouches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario document and summarize the final state.
    Simulate {
        scenario: PathBuf,
        /// Write the full trace as newline-delimited JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write every snapshot's polyline as CSV.
        #[arg(long)]
        shapes: Option<PathBuf>,
    },
    /// Reproduce a bench experiment.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Fit joint angles to a goal polyline (CSV of x_m,y_m) and emit a script.
    Plan(PlanArgs),
    /// Start the HTTP/WebSocket gateway.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Tip deflection of a 60 cm cantilever across a pressure sweep.
    Deflection {
        /// Jam every pouch (default: all compliant).
        #[arg(long)]
        jammed: bool,
        /// Pressure sweep `a:b:step` in kPa (default 0.5 to 2.0 psi in 0.25 psi steps).
        #[arg(long)]
        pressures: Option<String>,
        /// Tip mass in grams.
        #[arg(long, default_value_t = 150.0)]
        load_g: f64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PlanArgs {
    goal: PathBuf,
    /// Write the compiled script as a scenario document.
    #[arg(long)]
    script_out: Option<PathBuf>,
    /// Scenario document whose spec describes the robot (default robot otherwise).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Acceptable residual in metres.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    /// Comma-separated joint angle grid in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    grid_deg: Option<Vec<f64>>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> Result<Scenario> {
    load_scenario(&read(path)?).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn shapes_csv(trace: &Trace) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["snapshot", "time_s", "x_m", "y_m"])?;
    for (k, snap) in trace.snapshots().enumerate() {
        for p in &snap.shape {
            w.write_record([k.to_string(), snap.time_s.to_string(), p.x.to_string(), p.y.to_string()])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn simulate(scenario: &Path, trace_out: Option<&Path>, shapes_out: Option<&Path>) -> Result<()> {
    let s = load(scenario)?;
    let trace = run(&s.spec, &s.script)?;
    if let Some(p) = trace_out {
        write(p, &trace.to_ndjson())?;
    }
    if let Some(p) = shapes_out {
        write(p, &shapes_csv(&trace)?)?;
    }
    let last = trace.final_snapshot().expect("trace has an initial snapshot");
    let mut out = std::io::stdout().lock();
    writeln!(out, "actions: {}", s.script.len())?;
    writeln!(out, "end time: {:.3} s", trace.end_time())?;
    writeln!(out, "everted: {:.3} m", last.everted_length_m)?;
    let states: Vec<&str> = last
        .pouch_states
        .iter()
        .map(|s| match s {
            PouchStatus::Jammed => "J",
            PouchStatus::Compliant => "C",
            PouchStatus::Transitional => "T",
            PouchStatus::NotEverted => "-",
        })
        .collect();
    writeln!(out, "pouches: {}", states.join(""))?;
    for j in &last.joints {
        writeln!(
            out,
            "joint {}: {:+.3} deg{}",
            j.pouch,
            j.angle_rad.to_degrees(),
            if j.locked { " (locked)" } else { "" }
        )?;
    }
    if let Some(tip) = last.shape.last() {
        writeln!(out, "tip: ({:.4}, {:.4}) m", tip.x, tip.y)?;
    }
    Ok(())
}

fn deflection(jammed: bool, pressures: Option<&str>, load_g: f64, csv_out: Option<&Path>) -> Result<()> {
    let pressures = match pressures {
        Some(r) => parse_pressure_range(r).map_err(anyhow::Error::msg)?,
        None => standard_pressures(),
    };
    let state = if jammed {
        JamCondition::Jammed
    } else {
        JamCondition::Unjammed
    };
    let rows = deflection_experiment(&DeflectionSetup::default(), &pressures, load_from_grams(load_g), state);
    let table = deflection_csv(&rows);
    match csv_out {
        Some(p) => write(p, &table),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn plan(args: &PlanArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => load(p)?.spec,
        None => RobotSpec::default(),
    };
    let points = read_goal_csv(&read(&args.goal)?)?;
    let goal = GoalShape::new(points, args.tolerance)?;
    let grid = match &args.grid_deg {
        Some(g) => g.iter().map(|d| d.to_radians()).collect(),
        None => default_angle_grid(),
    };
    let plan = fit_joint_angles(&goal, &spec, &grid)?;
    let script = compile_actions(&plan, &spec);
    if let Some(p) = &args.script_out {
        let doc = Scenario {
            spec: spec.clone(),
            script: script.clone(),
        };
        write(p, &doc.to_json_pretty())?;
    }
    let summary = serde_json::json!({
        "angles_deg": plan.angles.iter().map(|a| a.to_degrees()).collect::<Vec<_>>(),
        "cost": plan.cost,
        "residual_m": plan.residual_m,
        "within_tolerance": plan.within_tolerance(),
        "goal_length_m": plan.goal_length_m,
        "predicted_tip": predicted_shape(&plan, &spec).last(),
        "script": script,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if !plan.within_tolerance() {
        eprintln!(
            "warning: residual {:.4} m exceeds tolerance {:.4} m",
            plan.residual_m, plan.tolerance_m
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            scenario,
            trace,
            shapes,
        } => simulate(&scenario, trace.as_deref(), shapes.as_deref()),
        Command::Experiment(Experiment::Deflection {
            jammed,
            pressures,
            load_g,
            csv,
        }) => {
            if load_g.is_nan() || load_g < 0.0 {
                bail!("--load-g must be non-negative");
            }
            deflection(jammed, pressures.as_deref(), load_g, csv.as_deref())
        }
        Command::Plan(args) => plan(&args),
        Command::Serve { bind } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(jambeam_gateway::serve(bind))?;
            Ok(())
        }
    }
}
