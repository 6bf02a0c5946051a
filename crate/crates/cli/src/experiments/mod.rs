//! The experiments behind each subcommand. Each one reads its parameters,
//! rejects unknown keys, builds its models (so precondition failures surface
//! before any integration) and then runs.

mod adiabatic;
mod dicke;
mod optomech;
mod radiocarbon;
mod regime;
mod swap;
mod two_level;

use std::fmt;
use std::str::FromStr;

use machclock::dynamics::TimeGrid;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, Params, RunSettings};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Radiocarbon,
    TwoLevel,
    SwapClock,
    OptomechJump,
    DickeDecay,
    AdiabaticValidate,
    JzMeasure,
    RegimeScan,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Radiocarbon,
        Experiment::TwoLevel,
        Experiment::SwapClock,
        Experiment::OptomechJump,
        Experiment::DickeDecay,
        Experiment::AdiabaticValidate,
        Experiment::JzMeasure,
        Experiment::RegimeScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Radiocarbon => "radiocarbon",
            Experiment::TwoLevel => "two-level",
            Experiment::SwapClock => "swap-clock",
            Experiment::OptomechJump => "optomech-jump",
            Experiment::DickeDecay => "dicke-decay",
            Experiment::AdiabaticValidate => "adiabatic-validate",
            Experiment::JzMeasure => "jz-measure",
            Experiment::RegimeScan => "regime-scan",
        }
    }

    pub fn default_trajectories(self) -> usize {
        match self {
            Experiment::Radiocarbon => 200,
            Experiment::SwapClock => 1,
            Experiment::OptomechJump | Experiment::JzMeasure => 1000,
            _ => 1,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Column-major data written as one CSV file; the first column is `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    /// Build from named columns of equal length.
    pub fn from_columns(cols: Vec<(String, Vec<f64>)>) -> Self {
        let n = cols.first().map_or(0, |(_, v)| v.len());
        debug_assert!(cols.iter().all(|(_, v)| v.len() == n));
        let rows = (0..n).map(|i| cols.iter().map(|(_, v)| v[i]).collect()).collect();
        Self {
            columns: cols.into_iter().map(|(c, _)| c).collect(),
            rows,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// An invariant or agreement check reported in the summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= tolerance,
            value,
            tolerance,
        }
    }

    /// Passes when `value ≥ tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value >= tolerance,
            value,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub lines: Vec<(String, Vec<f64>)>,
}

impl Plot {
    pub fn new(name: &str, title: &str, y_label: &str, x: Vec<f64>, lines: Vec<(&str, Vec<f64>)>) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            x_label: "t".into(),
            y_label: y_label.into(),
            x,
            lines: lines.into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
        }
    }
}

/// Everything an experiment produces; written out by [`crate::output`].
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub series: Table,
    /// `(label, t/dy table)` per measurement channel.
    pub records: Vec<(String, Table)>,
    pub estimates: Map<String, Value>,
    pub checks: Vec<Check>,
    pub plots: Vec<Plot>,
    pub warnings: Vec<String>,
}

impl Default for Table {
    fn default() -> Self {
        Self::new(&["t"], Vec::new())
    }
}

impl Outcome {
    pub fn estimate<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.estimates.insert(key.to_string(), v);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Record table `t,dy`; `t` is the start of the step `dy` covers.
pub(crate) fn record_table(dt: f64, increments: &[f64]) -> Table {
    let rows = increments
        .iter()
        .enumerate()
        .map(|(k, dy)| vec![k as f64 * dt, *dy])
        .collect();
    Table::new(&["t", "dy"], rows)
}

/// Time grid from `run.dt`, `run.t_final` and `run.stride`.
pub(crate) fn time_grid(params: &mut Params, t_final: f64, dt: f64, stride: usize) -> Result<TimeGrid, CliError> {
    let dt = params.checked("run.dt", dt, |v| v > 0.0 && v.is_finite(), "positive")?;
    let t_final = params.checked("run.t_final", t_final, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let stride: usize = params.get("run.stride", stride)?;
    let grid = TimeGrid::new(t_final, dt).map_err(|e| params.error("run.t_final", e.to_string()))?;
    Ok(grid.with_stride(stride))
}

/// Largest power of ten not above `x`, used for default steps so that round
/// final times stay whole multiples of `dt`.
pub(crate) fn pow10_floor(x: f64) -> f64 {
    10f64.powi(x.log10().floor() as i32)
}

/// `t` rounded to a whole number of steps `dt` (at least one).
pub(crate) fn whole_steps(t: f64, dt: f64) -> f64 {
    (t / dt).round().max(1.0) * dt
}

/// Run the configured experiment; returns the outcome and the parameter echo.
pub fn run_experiment(mut config: ExperimentConfig) -> Result<(Outcome, Vec<(String, String)>), CliError> {
    let params = &mut config.params;
    let run = &config.run;
    let outcome = match config.experiment {
        Experiment::Radiocarbon => radiocarbon::run(params, run)?,
        Experiment::TwoLevel => two_level::run(params, run)?,
        Experiment::SwapClock => swap::run(params, run)?,
        Experiment::OptomechJump => optomech::run_jump(params, run)?,
        Experiment::DickeDecay => dicke::run(params, run)?,
        Experiment::AdiabaticValidate => adiabatic::run(params, run)?,
        Experiment::JzMeasure => optomech::run_measure(params, run)?,
        Experiment::RegimeScan => regime::run(params, run)?,
    };
    Ok((outcome, params.echo().to_vec()))
}

/// Ensemble options from the run settings.
pub(crate) fn ensemble_options(run: &RunSettings, keep: usize) -> machclock::trajectories::EnsembleOptions {
    let mut o = machclock::trajectories::EnsembleOptions::new(run.n_traj, run.master_seed).keep(keep);
    if let Some(w) = run.workers {
        o = o.workers(w);
    }
    o
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("swap".parse::<Experiment>().is_err());
    }

    #[test]
    fn helpers() {
        assert_eq!(pow10_floor(4.9e-4), 1e-4);
        assert_eq!(whole_steps(1.0 / 3.0, 0.1), 0.30000000000000004);
        let t = Table::from_columns(vec![("t".into(), vec![0.0, 1.0]), ("x".into(), vec![2.0, 3.0])]);
        assert_eq!(t.rows, vec![vec![0.0, 2.0], vec![1.0, 3.0]]);
        assert_eq!(t.column("x").unwrap(), vec![2.0, 3.0]);
    }
}
