//! Flat `key = value` configuration files with `[section]` headers.
//!
//! ```text
//! experiment = swap-clock
//!
//! [model]
//! gamma = 500
//! Gamma = 1
//!
//! [run]
//! dt = 1e-6
//! master_seed = 7
//! ```
//!
//! Keys are addressed as `section.key`. Every key must be consumed by the
//! selected experiment, so typos are reported instead of silently ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::experiments::Experiment;

const SECTIONS: [&str; 2] = ["model", "run"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            key: key.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "key '{key}': ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    /// `None` for values supplied on the command line.
    line: Option<usize>,
    used: bool,
}

/// Raw keys of one configuration, tracking which ones were consumed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    entries: BTreeMap<String, Entry>,
    /// Resolved values (defaults included) in first-use order.
    echo: Vec<(String, String)>,
}

impl Params {
    /// Parse configuration text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut params = Self::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(Some(line), None, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::new(
                        Some(line),
                        None,
                        format!("unknown section [{name}] (expected one of {SECTIONS:?})"),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(Some(line), None, format!("expected key = value, got '{content}'")))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::new(Some(line), None, format!("invalid key '{key}'")));
            }
            let full = match &section {
                Some(s) => format!("{s}.{key}"),
                None => key.to_string(),
            };
            params.insert(&full, value.trim(), Some(line))?;
        }
        Ok(params)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(None, None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn insert(&mut self, key: &str, value: &str, line: Option<usize>) -> Result<(), ConfigError> {
        if let Some(prev) = self.entries.get(key) {
            if line.is_some() {
                let first = prev.line.map(|l| format!(" (first set on line {l})")).unwrap_or_default();
                return Err(ConfigError::new(line, Some(key), format!("duplicate key{first}")));
            }
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
                used: false,
            },
        );
        Ok(())
    }

    /// Command-line override; replaces any value from the file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !key.contains('.') && key != "experiment" {
            return Err(ConfigError::new(None, Some(key), "overrides must name a section, e.g. model.gamma"));
        }
        let section = key.split('.').next().unwrap_or("");
        if key != "experiment" && !SECTIONS.contains(&section) {
            return Err(ConfigError::new(None, Some(key), format!("unknown section '{section}'")));
        }
        self.insert(key, value, None)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn raw(&mut self, key: &str) -> Option<(String, Option<usize>)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn record(&mut self, key: &str, value: String) {
        if !self.echo.iter().any(|(k, _)| k == key) {
            self.echo.push((key.to_string(), value));
        }
    }

    /// Typed value with a default.
    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let v = match self.raw(key) {
            Some((s, line)) => s
                .parse::<T>()
                .map_err(|e| ConfigError::new(line, Some(key), format!("cannot parse '{s}': {e}")))?,
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Typed value that may be absent.
    pub fn optional<T>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            Some((s, line)) => {
                let v = s
                    .parse::<T>()
                    .map_err(|e| ConfigError::new(line, Some(key), format!("cannot parse '{s}': {e}")))?;
                self.record(key, v.to_string());
                Ok(Some(v))
            }
            None => Ok(None),
        }
    }

    /// Comma-separated list of numbers.
    pub fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let v = match self.raw(key) {
            Some((s, line)) => s
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| ConfigError::new(line, Some(key), format!("cannot parse '{x}': {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => default.to_vec(),
        };
        let text = v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        self.record(key, text);
        Ok(v)
    }

    /// Float that must satisfy `check`, reported against the key's line.
    pub fn checked(
        &mut self,
        key: &str,
        default: f64,
        check: impl Fn(f64) -> bool,
        what: &str,
    ) -> Result<f64, ConfigError> {
        let v = self.get(key, default)?;
        if !check(v) {
            return Err(self.error(key, format!("{v} must be {what}")));
        }
        Ok(v)
    }

    /// Error attributed to `key` (and its line, when it came from a file).
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self.entries.get(key).and_then(|e| e.line);
        ConfigError::new(line, Some(key), message)
    }

    /// Fail on keys nobody asked for.
    pub fn finish(&self) -> Result<(), ConfigError> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((k, e)) => Err(ConfigError::new(e.line, Some(k), "unknown key for this experiment")),
            None => Ok(()),
        }
    }

    pub fn echo(&self) -> &[(String, String)] {
        &self.echo
    }
}

/// Run-level settings common to every experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub n_traj: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub emit_plots: bool,
    /// Worker threads for ensembles (`None`: all cores). Never changes results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

/// A fully parsed experiment: selected experiment plus its raw parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub run: RunSettings,
    pub params: Params,
}

/// Command-line overrides, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub trajectories: Option<usize>,
    pub plots: bool,
    pub workers: Option<usize>,
    pub set: Vec<(String, String)>,
}

impl ExperimentConfig {
    /// Merge file parameters (if any) with flags; the subcommand wins only
    /// when the file does not name a different experiment.
    pub fn resolve(experiment: Experiment, mut params: Params, overrides: &Overrides) -> Result<Self, ConfigError> {
        for (k, v) in &overrides.set {
            params.set(k, v)?;
        }
        if let Some((name, line)) = params.raw("experiment") {
            let named: Experiment = name
                .parse()
                .map_err(|e: String| ConfigError::new(line, Some("experiment"), e))?;
            if named != experiment {
                return Err(ConfigError::new(
                    line,
                    Some("experiment"),
                    format!("file describes '{named}' but the '{experiment}' subcommand was given"),
                ));
            }
        }
        params.record("experiment", experiment.to_string());
        let default_traj = experiment.default_trajectories();
        let mut n_traj: usize = params.get("run.n_traj", default_traj)?;
        if let Some(n) = overrides.trajectories {
            n_traj = n;
            params.echo.retain(|(k, _)| k != "run.n_traj");
            params.record("run.n_traj", n.to_string());
        }
        if n_traj == 0 {
            return Err(params.error("run.n_traj", "must be at least 1"));
        }
        let mut master_seed: u64 = params.get("run.master_seed", 1)?;
        if let Some(s) = overrides.seed {
            master_seed = s;
            params.echo.retain(|(k, _)| k != "run.master_seed");
            params.record("run.master_seed", s.to_string());
        }
        let dir: String = params.get("run.output_dir", format!("out/{experiment}"))?;
        let output_dir = overrides.out_dir.clone().unwrap_or_else(|| PathBuf::from(dir));
        let emit_plots = params.get("run.emit_plots", false)? || overrides.plots;
        let workers = match overrides.workers {
            Some(w) => Some(w),
            None => params.optional::<usize>("run.workers")?,
        };
        // output location and worker count do not affect results: keep them out of the echo
        params.echo.retain(|(k, _)| k != "run.output_dir" && k != "run.workers" && k != "run.emit_plots");
        Ok(Self {
            experiment,
            run: RunSettings {
                n_traj,
                master_seed,
                output_dir,
                emit_plots,
                workers,
            },
            params,
        })
    }
}
