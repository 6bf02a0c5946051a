//! Batch front end: parses an experiment configuration, runs it with a fixed
//! master seed and writes CSV, JSON and SVG artifacts.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

use std::fmt;
use std::path::PathBuf;

pub use config::{ConfigError, ExperimentConfig, Overrides, Params};
pub use experiments::{run_experiment, Check, Experiment, Outcome, Plot, Table};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a run, mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    /// Rejected by a model or integrator precondition before or during setup.
    Model(machclock::Error),
    Io(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric aborts, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_numeric_abort() => 3,
            CliError::Model(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Model(e) if e.is_numeric_abort() => write!(f, "numeric abort: {e}"),
            CliError::Model(e) => write!(f, "invalid parameters: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<machclock::Error> for CliError {
    fn from(e: machclock::Error) -> Self {
        CliError::Model(e)
    }
}

/// Files written by [`run`] together with the experiment outcome.
#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
}

/// Run an experiment and write its artifacts into `config.run.output_dir`.
pub fn run(config: ExperimentConfig) -> Result<RunReport, CliError> {
    let experiment = config.experiment;
    let run = config.run.clone();
    let (outcome, echo) = run_experiment(config)?;
    let files = output::write_all(experiment, &run, &echo, &outcome)?;
    Ok(RunReport { files, outcome })
}
