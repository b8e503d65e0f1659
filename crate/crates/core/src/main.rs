use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use funcoord::config::{Experiment, ExperimentConfig};
use funcoord::experiments;
use funcoord::tolerances::Tolerances;
use funcoord::Error;

/// Numerical experiments on kernel-defined coordinate spaces.
///
/// Exit status: 0 when every tolerance is met, 1 when a check fails,
/// 2 for usage or configuration errors, 3 when a computation errors out.
#[derive(Parser)]
#[command(name = "funcoord", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Delta inner products and the dual-metric identity.
    DualMetric(Common),
    /// Spectrum of -iD (or a multiplication operator) and its Fourier diagonalization.
    Eigen(Common),
    /// Transformation laws, proper bases, unbounded-operator metrics, locality.
    TransformCheck(Common),
    /// Induced metrics, mollifier cross-check and Gram matrices of deltas.
    Embed(Common),
    /// Schrodinger evolution as a geodesic of the projective metric.
    Geodesic(Common),
    /// Every experiment with default settings, run twice and compared.
    Repro(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for CSV tables and the JSON summary.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Seed of the random generator; overrides the configuration file.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Override a named tolerance; may be repeated.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn prepare(experiment: Experiment, common: &Common) -> Result<(ExperimentConfig, Tolerances), Failure> {
    let text = match &common.config {
        None => None,
        Some(path) => Some(
            fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        ),
    };
    experiments::configure(experiment, text.as_deref(), common.seed, &common.tol).map_err(|e| match (e, &common.config) {
        (Error::Config(e), Some(path)) => Failure::Usage(format!("{}: {e}", path.display())),
        (Error::InvalidArgument(m), _) => Failure::Usage(format!("--tol: {m}")),
        (e, _) => Failure::Usage(e.to_string()),
    })
}

fn execute(experiment: Experiment, common: &Common) -> Result<bool, Failure> {
    let (config, tolerances) = prepare(experiment, common)?;
    let report = experiments::run(&config, &tolerances).map_err(|e| Failure::Runtime(e.to_string()))?;
    report.write(&common.out).map_err(|e| Failure::Runtime(format!("{}: {e}", common.out.display())))?;
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!(
        "{}: {} (seed {}, results in {})",
        report.experiment,
        if report.passed() { "all tolerances met" } else { "tolerances violated" },
        report.seed,
        common.out.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::DualMetric(c) => (Experiment::DualMetric, c),
        Command::Eigen(c) => (Experiment::Eigen, c),
        Command::TransformCheck(c) => (Experiment::TransformCheck, c),
        Command::Embed(c) => (Experiment::Embed, c),
        Command::Geodesic(c) => (Experiment::Geodesic, c),
        Command::Repro(c) => (Experiment::Repro, c),
    };
    match execute(experiment, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
