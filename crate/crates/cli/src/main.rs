use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use machclock_cli::{run, ConfigError, Experiment, ExperimentConfig, Overrides, Params};

#[derive(Parser)]
#[command(name = "machclock", version, about = "Thermal-clock simulations with seeded, reproducible output")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decay-count clock: spread of N/γ against (γt)^-1/2
    Radiocarbon(Common),
    /// Thermalising qubit against its closed-form solution
    TwoLevel(Common),
    /// Swap-mixed qubit pair under weak energy measurement
    SwapClock(Common),
    /// Photon-exchange jump trajectories of the eliminated cavity model
    OptomechJump(Common),
    /// Collective decay: top state or thermal cavities
    DickeDecay(Common),
    /// Full optomechanical model against the eliminated model
    AdiabaticValidate(Common),
    /// Continuous photon-number read-out of one cavity
    JzMeasure(Common),
    /// Signal against noise for a range of divergences
    RegimeScan(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file (key = value lines with [model] and [run] sections)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides run.master_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides run.output_dir
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of trajectories; overrides run.n_traj
    #[arg(long)]
    trajectories: Option<usize>,
    /// Worker threads (results do not depend on it)
    #[arg(long)]
    workers: Option<usize>,
    /// Also write plot_<name>.svg files
    #[arg(long)]
    plots: bool,
    /// Override one key, e.g. --set model.gamma=2
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Radiocarbon(c) => (Experiment::Radiocarbon, c),
            Command::TwoLevel(c) => (Experiment::TwoLevel, c),
            Command::SwapClock(c) => (Experiment::SwapClock, c),
            Command::OptomechJump(c) => (Experiment::OptomechJump, c),
            Command::DickeDecay(c) => (Experiment::DickeDecay, c),
            Command::AdiabaticValidate(c) => (Experiment::AdiabaticValidate, c),
            Command::JzMeasure(c) => (Experiment::JzMeasure, c),
            Command::RegimeScan(c) => (Experiment::RegimeScan, c),
        }
    }
}

fn configure(experiment: Experiment, common: Common) -> Result<ExperimentConfig, ConfigError> {
    let params = match &common.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    let mut set = Vec::new();
    for item in &common.set {
        let (k, v) = item.split_once('=').ok_or_else(|| ConfigError {
            line: None,
            key: None,
            message: format!("--set expects KEY=VALUE, got '{item}'"),
        })?;
        set.push((k.trim().to_string(), v.trim().to_string()));
    }
    let overrides = Overrides {
        seed: common.seed,
        out_dir: common.out_dir,
        trajectories: common.trajectories,
        plots: common.plots,
        workers: common.workers,
        set,
    };
    ExperimentConfig::resolve(experiment, params, &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = cli.command.split();
    let config = match configure(experiment, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("machclock: config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(config) {
        Ok(report) => {
            for w in &report.outcome.warnings {
                eprintln!("warning: {w}");
            }
            for c in &report.outcome.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                println!("{mark} {:<40} {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("machclock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
