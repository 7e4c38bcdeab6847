//! `flatbody` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration or usage error, 2 flagged runtime
//! termination (degeneracy during a run, failed decomposition), 3 no
//! stationary solution. `check` exits 1 when any check fails.

mod check;
mod config;
mod decompose;
mod output;
mod simulate;
mod stationary;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    /// Message for stderr plus an optional JSON body for stdout.
    Flagged(String, Option<String>),
    NoSolution(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Flagged(..) => 2,
            Self::NoSolution(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "flatbody", version, about = "Dynamics of a flat deformable body with oscillating thickness")]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized fixtures
    #[arg(long, global = true, default_value_t = check::DEFAULT_SEED)]
    seed: u64,
    /// Suppress progress and tables
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a trajectory; writes trajectory.csv and summary.json
    Simulate,
    /// Solve for a stationary ellipse
    Stationary,
    /// Run the built-in invariant suite
    Check {
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb_eom: f64,
    },
    /// Two-polar decomposition of a row-major 3x3 placement matrix
    Decompose {
        #[arg(num_args = 9, allow_negative_numbers = true, value_name = "PHI")]
        entries: Vec<f64>,
    },
}

fn apply_env_tolerance() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FLATBODY_EPS") else {
        return Ok(());
    };
    let tol: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("FLATBODY_EPS must be a number, got {raw:?}")))?;
    flatbody::tolerance::set_degeneracy_tolerance(tol).map_err(|e| Failure::Config(format!("FLATBODY_EPS: {e}")))
}

fn load(cli: &Cli) -> Result<(config::RunConfig, PathBuf), Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let cfg = config::load(path)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    apply_env_tolerance()?;
    match &cli.command {
        Command::Simulate => {
            let (cfg, out) = load(cli)?;
            let flagged = simulate::run(&cfg, &out, cli.quiet)?;
            Ok(if flagged { 2 } else { 0 })
        }
        Command::Stationary => {
            let (cfg, out) = load(cli)?;
            let found = stationary::run(&cfg, &out, cli.quiet)?;
            Ok(if found { 0 } else { 3 })
        }
        Command::Check { perturb_eom } => {
            let results = check::run(&check::Options {
                seed: cli.seed,
                perturb_eom: *perturb_eom,
            });
            let all = results.iter().all(|r| r.passed());
            for r in &results {
                if !cli.quiet || !r.passed() {
                    println!(
                        "{:<28} max_error={:<12.3e} tol={:<8.0e} {}",
                        r.name,
                        r.max_error,
                        r.tolerance,
                        if r.passed() { "PASS" } else { "FAIL" }
                    );
                }
            }
            let failed = results.iter().filter(|r| !r.passed()).count();
            println!("{} checks, {} failed", results.len(), failed);
            Ok(if all { 0 } else { 1 })
        }
        Command::Decompose { entries } => {
            println!("{}", decompose::run(entries)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Config(m) | Failure::Io(m) | Failure::NoSolution(m) => eprintln!("error: {m}"),
                Failure::Flagged(m, json) => {
                    if let Some(j) = json {
                        println!("{j}");
                    }
                    eprintln!("error: {m}");
                }
            }
            ExitCode::from(f.code())
        }
    }
}
