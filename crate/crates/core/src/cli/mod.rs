//! The `blowup-lab` command line: `ode`, `bounds`, `classify`, `pde` and
//! `verify` over a JSON experiment file.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 validation or parse error,
//! 3 inconclusive or unsupported.

pub mod config;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{ExperimentConfig, FieldError, ValidationErrors, DEFAULT_SEED};

use crate::bounds::{self, CorollaryClass};
use crate::companion::{blow_up_bracket, solve, BracketOutcome};
use crate::error::Error;
use crate::pde::{self, field_dump_csv, snapshots_csv, space_infinity_report, RunStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "blowup-lab", version, about = "Blow-up analysis for weakly coupled reaction-diffusion systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for report.json and CSV output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Companion ODE trajectory and blow-up bracket.
    Ode,
    /// Upper bounds and global certificates for every applicable case.
    Bounds,
    /// Case labels and the constant-coefficient classification.
    Classify,
    /// Spectral simulation with snapshots and far-field report.
    Pde,
    /// Invariant suites with a pass/fail table.
    Verify,
}

/// A finished command: the JSON report, extra files for `--out`, a short
/// human-readable summary and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub files: Vec<(String, String)>,
    pub summary: String,
    pub exit: i32,
}

fn with_config(cfg: &ExperimentConfig, body: Value) -> Value {
    let mut v = json!({ "config": cfg });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

pub fn cmd_ode(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let prob = cfg.companion_problem()?;
    let controls = cfg.solve_controls();
    let traj = solve(&prob, cfg.ode.t_end, controls)?;
    let bracket = blow_up_bracket(&prob, controls)?;
    let exit = match bracket {
        BracketOutcome::Inconclusive { .. } => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    let summary = match &bracket {
        BracketOutcome::BlowUp { t_lo, t_hi: Some(t_hi), .. } => format!("blow-up in [{t_lo:.12e}, {t_hi:.12e}]"),
        BracketOutcome::BlowUp { t_lo, t_hi: None, .. } => format!("escape at {t_lo:.12e}; no upper bound"),
        BracketOutcome::Global { .. } => "global".to_string(),
        BracketOutcome::Inconclusive { reason, .. } => format!("inconclusive: {reason}"),
    };
    Ok(Outcome {
        report: with_config(
            cfg,
            json!({ "trajectory": { "status": traj.status, "steps": traj.steps, "last": traj.last() }, "bracket": bracket }),
        ),
        files: vec![("trajectory.csv".into(), traj.to_csv())],
        summary,
        exit,
    })
}

pub fn cmd_bounds(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let prob = cfg.companion_problem()?;
    let rep = bounds::report(&prob, &cfg.bounds_options())?;
    let mut body = json!({ "bounds": rep });
    if cfg.bounds.audit_simulation {
        let bracket = blow_up_bracket(&prob, cfg.solve_controls())?;
        // an upper bound is sound when the simulated escape is not later
        let sound = match (&bracket, rep.system_upper_bound) {
            (BracketOutcome::BlowUp { t_lo, .. }, Some(tau)) => Some(*t_lo <= tau * (1.0 + 1e-6)),
            (BracketOutcome::Global { .. }, Some(_)) => Some(false),
            _ => None,
        };
        body["audit"] = json!({ "bracket": bracket, "upper_bound_consistent": sound });
    }
    let summary = if rep.unsupported {
        "unsupported: no case applies".to_string()
    } else {
        let cases: Vec<&str> = rep.verdicts.iter().map(|v| v.case.as_str()).collect();
        match rep.system_upper_bound {
            Some(t) => format!("cases {}; tightest upper bound {t:.12e}", cases.join(", ")),
            None => format!("cases {}; no upper bound", cases.join(", ")),
        }
    };
    Ok(Outcome {
        exit: if rep.unsupported { EXIT_INCONCLUSIVE } else { EXIT_OK },
        report: with_config(cfg, body),
        files: Vec::new(),
        summary,
    })
}

pub fn cmd_classify(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let prob = cfg.companion_problem()?;
    let e = prob.exponents;
    let cases = bounds::case_dispatch(&e, &cfg.bounds_options());
    let constant_h = prob.h.iter().all(|h| h.is_constant());
    let corollary = constant_h.then(|| bounds::corollary_classify(&e));
    let labels: Vec<String> = cases
        .iter()
        .map(|c| format!("{:?}(i={}, j={})", c.case, c.i, c.j).to_lowercase())
        .collect();
    let summary = match corollary {
        Some(CorollaryClass::BlowUp) => "blow-up for all positive data".to_string(),
        Some(CorollaryClass::NotCovered) => "not covered by the constant-coefficient criterion".to_string(),
        None => "h is not constant; criterion not applicable".to_string(),
    };
    Ok(Outcome {
        report: with_config(
            cfg,
            json!({
                "cases": cases,
                "labels": labels,
                "unsupported": cases.is_empty(),
                "determinant": e.determinant(),
                "corollary": corollary,
            }),
        ),
        files: Vec::new(),
        summary,
        exit: if corollary.is_some() { EXIT_OK } else { EXIT_INCONCLUSIVE },
    })
}

pub fn cmd_pde(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let pc = cfg.pde_config()?;
    let sim = pde::run(&pc)?;
    let g = &sim.grid;
    let space_infinity = match sim.status {
        RunStatus::BlowUpDetected { .. } => Some(space_infinity_report(&sim)?),
        _ => None,
    };
    let summary = match sim.status {
        RunStatus::Completed { t_end } => format!("completed at t = {t_end}"),
        RunStatus::BlowUpDetected { last_stable_t } => format!("blow-up detected; last stable t = {last_stable_t:.12e}"),
        RunStatus::BudgetExceeded { t } => format!("step budget exceeded at t = {t}"),
    };
    let exit = match sim.status {
        RunStatus::BudgetExceeded { .. } => EXIT_INCONCLUSIVE,
        _ => EXIT_OK,
    };
    Ok(Outcome {
        report: with_config(
            cfg,
            json!({
                "grid": { "dim": g.dim(), "points_per_axis": g.points_per_axis(), "half_length": g.half_length() },
                "status": sim.status,
                "steps": sim.steps,
                "rejected": sim.rejected,
                "snapshots": sim.snapshots.len(),
                "final": sim.snapshots.last(),
                "space_infinity": space_infinity,
            }),
        ),
        files: vec![
            ("snapshots.csv".into(), snapshots_csv(&sim.snapshots)),
            ("fields.csv".into(), field_dump_csv(g, &sim.fields)),
        ],
        summary,
        exit,
    })
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    let checks = verify::run_suites(cfg);
    let table: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name))
        .collect();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let mut summary = table.join("\n");
    if !failed.is_empty() {
        summary.push_str(&format!("\nfailed: {}", failed.join(", ")));
    }
    Ok(Outcome {
        report: with_config(cfg, json!({ "checks": checks, "all_pass": failed.is_empty() })),
        files: Vec::new(),
        summary,
        exit: if failed.is_empty() { EXIT_OK } else { EXIT_INVARIANT },
    })
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, Error> {
    match command {
        Command::Ode => cmd_ode(cfg),
        Command::Bounds => cmd_bounds(cfg),
        Command::Classify => cmd_classify(cfg),
        Command::Pde => cmd_pde(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None if cli.command == Command::Verify => ExperimentConfig::default_verify(),
        None => return Err("--config is required".into()),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_outputs(dir: &Path, outcome: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut report = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    report.push('\n');
    fs::write(dir.join("report.json"), report)?;
    for (name, body) in &outcome.files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_INVALID;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return EXIT_INVALID;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    let outcome = match pool.install(|| execute(cli.command, &cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::Parse(_) | Error::Invalid(_) => EXIT_INVALID,
                _ => EXIT_INVARIANT,
            };
        }
    };
    match &cli.out {
        Some(dir) => {
            if let Err(e) = write_outputs(dir, &outcome) {
                eprintln!("error: {}: {e}", dir.display());
                return EXIT_INVARIANT;
            }
            println!("{}", outcome.summary);
        }
        None if cli.command == Command::Verify => println!("{}", outcome.summary),
        None => println!("{}", serde_json::to_string_pretty(&outcome.report).expect("report serializes")),
    }
    outcome.exit
}

pub fn main() -> i32 {
    main_with(std::env::args_os())
}
