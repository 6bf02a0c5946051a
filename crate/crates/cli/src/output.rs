//! Artifact writers. Every file starts with the tool version, master seed and
//! the full resolved parameter list so it can be traced back to its run.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::RunSettings;
use crate::experiments::{Experiment, Outcome, Table};
use crate::{svg, CliError, TOOL_VERSION};

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// `#` comment lines preceding the CSV header.
fn preamble(experiment: Experiment, run: &RunSettings, echo: &[(String, String)]) -> String {
    let mut s = format!("# machclock {TOOL_VERSION}\n# experiment = {experiment}\n# master_seed = {}\n", run.master_seed);
    for (k, v) in echo {
        if k != "experiment" && k != "run.master_seed" {
            s.push_str(&format!("# {k} = {v}\n"));
        }
    }
    s
}

fn field(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        v.to_string()
    }
}

/// CSV text for `table`, header first.
pub fn csv(table: &Table, preamble: &str) -> String {
    let mut s = String::with_capacity(preamble.len() + 24 * table.rows.len() * table.columns.len());
    s.push_str(preamble);
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|v| field(*v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn write(path: PathBuf, text: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    files.push(path);
    Ok(())
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// The JSON summary document.
pub fn summary(experiment: Experiment, run: &RunSettings, echo: &[(String, String)], outcome: &Outcome) -> Value {
    let params: serde_json::Map<String, Value> = echo.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let checks: Vec<Value> = outcome
        .checks
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "passed": c.passed,
                "value": finite_or_null(c.value),
                "tolerance": finite_or_null(c.tolerance),
            })
        })
        .collect();
    json!({
        "tool": "machclock",
        "version": TOOL_VERSION,
        "experiment": experiment.to_string(),
        "master_seed": run.master_seed,
        "n_traj": run.n_traj,
        "parameters": params,
        "estimates": Value::Object(outcome.estimates.clone()),
        "checks": checks,
        "warnings": outcome.warnings,
    })
}

pub fn write_all(
    experiment: Experiment,
    run: &RunSettings,
    echo: &[(String, String)],
    outcome: &Outcome,
) -> Result<Vec<PathBuf>, CliError> {
    let dir = &run.output_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let head = preamble(experiment, run, echo);
    let mut files = Vec::new();
    write(dir.join("series.csv"), &csv(&outcome.series, &head), &mut files)?;
    for (label, table) in &outcome.records {
        write(dir.join(format!("records_{label}.csv")), &csv(table, &head), &mut files)?;
    }
    let mut doc = serde_json::to_string_pretty(&summary(experiment, run, echo, outcome))
        .map_err(|e| CliError::Io(e.to_string()))?;
    doc.push('\n');
    write(dir.join("summary.json"), &doc, &mut files)?;
    if run.emit_plots {
        let comment = head.lines().map(|l| l.trim_start_matches("# ")).collect::<Vec<_>>().join("; ");
        for plot in &outcome.plots {
            write(dir.join(format!("plot_{}.svg", plot.name)), &svg::render(plot, &comment), &mut files)?;
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let t = Table::new(&["t", "x"], vec![vec![0.0, 1.5], vec![0.1, f64::NAN]]);
        assert_eq!(csv(&t, "# a\n"), "# a\nt,x\n0,1.5\n0.1,NaN\n");
    }
}
