//! `cvkl`: composable finite-size key-length pipeline for coherent-state
//! CV-QKD — simulate, calibrate, estimate, compute key lengths, sweep block
//! sizes, and tabulate confidence intervals.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;

/// Errors mapped onto the documented exit codes: 2 config, 3 data/format,
/// 4 numerical.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<cvkl_core::dataset::DatasetError> for CliError {
    fn from(e: cvkl_core::dataset::DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<cvkl_core::simulator::SimulatorError> for CliError {
    fn from(e: cvkl_core::simulator::SimulatorError) -> Self {
        use cvkl_core::simulator::SimulatorError::*;
        match e {
            InvalidModel(_) | InvalidDigitization(_) => CliError::Config(e.to_string()),
            ManifestIo { .. } | ManifestFormat { .. } => CliError::Data(e.to_string()),
        }
    }
}

impl From<cvkl_core::estimation::EstimationError> for CliError {
    fn from(e: cvkl_core::estimation::EstimationError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<cvkl_core::confidence::ConfidenceError> for CliError {
    fn from(e: cvkl_core::confidence::ConfidenceError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<cvkl_core::security::SecurityError> for CliError {
    fn from(e: cvkl_core::security::SecurityError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "cvkl",
    version,
    about = "Composable CV-QKD key-length pipeline"
)]
struct Cli {
    /// Configuration file (flat `key = value` lines, dotted sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override run.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (directory for simulate, file for the other commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Confidence-interval method: beta | gaussian.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Repeatable config override, e.g. --override channel.eta=0.4
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate block datasets plus a manifest under --out.
    Simulate,
    /// Compute shot-noise bounds and worst-case trusted noise from a vacuum
    /// and an electronic calibration dataset.
    Calibrate {
        vacuum: PathBuf,
        electronic: PathBuf,
    },
    /// Estimate moments and worst-case channel parameters from datasets.
    Estimate {
        datasets: Vec<PathBuf>,
        /// Receiver calibration report (from `calibrate`); defaults to the
        /// configured channel.tau / channel.t.
        #[arg(long)]
        receiver: Option<PathBuf>,
    },
    /// Full pipeline: moments, entropy, worst case, Holevo bound, key length.
    Keylen {
        datasets: Vec<PathBuf>,
        #[arg(long)]
        receiver: Option<PathBuf>,
    },
    /// Key-length sweep over cumulative blocks of a manifest (or explicit
    /// sweep.n_values), one CSV row per block count.
    Sweep { manifest: PathBuf },
    /// Confidence-interval table over a log grid of sample counts.
    Intervals,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(
        cli.config.as_deref(),
        &cli.overrides,
        cli.seed,
        cli.method.as_deref(),
    )?;
    match cli.command {
        Command::Simulate => commands::simulate::run(&cfg, cli.out.as_deref()),
        Command::Calibrate { vacuum, electronic } => {
            commands::calibrate::run(&cfg, &vacuum, &electronic, cli.out.as_deref())
        }
        Command::Estimate { datasets, receiver } => {
            commands::estimate::run(&cfg, &datasets, receiver.as_deref(), cli.out.as_deref())
        }
        Command::Keylen { datasets, receiver } => {
            commands::keylen::run(&cfg, &datasets, receiver.as_deref(), cli.out.as_deref())
        }
        Command::Sweep { manifest } => commands::sweep::run(&cfg, &manifest, cli.out.as_deref()),
        Command::Intervals => commands::intervals::run(&cfg, cli.out.as_deref()),
    }
}
