//! Command-line driver for `qbsim-core`: configuration, seeded sweeps and
//! deterministic reports.

pub mod channels;
pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::ExperimentConfig;
use report::{emit_report, Format, ReportEnvelope};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse { line: usize, column: usize, message: String },
    #[error("no seed given: set `seed` in the config or pass --seed")]
    MissingSeed,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] qbsim_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sandwiched and Petz divergences on random pairs.
    Divergence,
    /// Rényi information with its minimizer certificate.
    RenyiInfo,
    /// Exact convex-split error against its bound.
    ConvexSplit,
    /// State-splitting error bounds.
    QssBound,
    /// Explicit two-receiver state-splitting protocol.
    QssDemo,
    /// Capacity-region thresholds of a broadcast channel.
    CapacityRegion,
    /// Channel error exponents.
    Exponent,
    /// One-shot simulation bound over a blocklength grid.
    SimulateBound,
    /// Moderate-deviation table.
    Moderate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Divergence => "divergence",
            Command::RenyiInfo => "renyi-info",
            Command::ConvexSplit => "convex-split",
            Command::QssBound => "qss-bound",
            Command::QssDemo => "qss-demo",
            Command::CapacityRegion => "capacity-region",
            Command::Exponent => "exponent",
            Command::SimulateBound => "simulate-bound",
            Command::Moderate => "moderate",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qbsim", version, about = "Convex splitting, Rényi information and broadcast simulation bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Largest total Hilbert-space dimension built explicitly.
    #[arg(long, global = true)]
    pub dim_cap: Option<usize>,
    /// Worker threads; defaults to the rayon default.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Reads the config file and applies flag overrides.
pub fn parse_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.trials.is_some() {
        cfg.trials = cli.trials;
    }
    if cli.dim_cap.is_some() {
        cfg.dim_cap = cli.dim_cap;
    }
    cfg.validate(cli.command.name())?;
    Ok(cfg)
}

/// Runs a command on a parsed config; the returned envelope echoes the
/// config with defaults filled in.
pub fn execute(command: Command, mut cfg: ExperimentConfig) -> Result<ReportEnvelope, CliError> {
    cfg.command = Some(command.name().into());
    cfg.output = None;
    let outcome = commands::run_command(command.name(), &mut cfg)?;
    let echo = serde_json::to_value(&cfg).expect("serializable");
    Ok(ReportEnvelope::new(command.name(), echo, outcome))
}

/// Full pipeline; returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let cfg = parse_config(&cli)?;
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let work = || execute(cli.command, cfg);
    let env = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    emit_report(&env, cli.format, out.as_deref())?;
    Ok(if env.passed() { 0 } else { 1 })
}
