use machclock::clocks::{radiocarbon_estimate, radiocarbon_relative_error};
use machclock::models::linear_fit;
use machclock::trajectories::{simulate_poisson_count, SeedSpec};

use super::{Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

/// Poisson decay counts at several `γt`; compares the spread of
/// `t_est = N/γ` with `(γt)^{-1/2}`.
pub(super) fn run(params: &mut Params, run: &RunSettings) -> Result<Outcome, CliError> {
    let gamma = params.checked("model.gamma", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let points = params.list("model.gamma_t", &[10.0, 100.0, 1000.0])?;
    if points.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(params.error("model.gamma_t", "every value must be positive").into());
    }
    params.finish()?;

    let mut rows = Vec::new();
    let (mut log_gt, mut log_err) = (Vec::new(), Vec::new());
    let mut out = Outcome::default();
    let mut undefined = 0usize;
    for (p, &gt) in points.iter().enumerate() {
        let t = gt / gamma;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for i in 0..run.n_traj {
            let seed = SeedSpec::new(run.master_seed, ((p as u64) << 32) | i as u64);
            let count = simulate_poisson_count(gamma, t, seed)?;
            let est = radiocarbon_estimate(count, gamma)?;
            let te = match est.t_est {
                Some(v) => v,
                None => {
                    undefined += 1;
                    0.0
                }
            };
            sum += te;
            sq += (te - t) * (te - t);
        }
        let n = run.n_traj as f64;
        let rel = (sq / n).sqrt() / t;
        let predicted = radiocarbon_relative_error(gt);
        out.checks.push(Check::at_most(&format!("rel_error_gamma_t_{gt}"), (rel / predicted - 1.0).abs(), 0.2));
        rows.push(vec![t, gt, sum / n, rel, predicted]);
        log_gt.push(gt.ln());
        log_err.push(rel.ln());
    }
    if points.len() >= 2 {
        let (slope, _) = linear_fit(&log_gt, &log_err);
        out.estimate("log_log_slope", slope);
        out.checks.push(Check::at_most("log_log_slope", (slope + 0.5).abs(), 0.05));
    }
    if undefined > 0 {
        out.warnings.push(format!("{undefined} runs had no decays; their estimate was taken as 0"));
    }
    out.estimate("gamma", gamma);
    out.estimate("runs_per_point", run.n_traj);
    out.series = Table::new(&["t", "gamma_t", "t_est_mean", "rel_error", "rel_error_predicted"], rows);
    let series = &out.series;
    out.plots.push(Plot {
        x_label: "gamma t".into(),
        ..Plot::new(
            "rel_error",
            "relative error of the decay-count clock",
            "relative error",
            series.column("gamma_t").unwrap_or_default(),
            vec![
                ("empirical", series.column("rel_error").unwrap_or_default()),
                ("(gamma t)^-1/2", series.column("rel_error_predicted").unwrap_or_default()),
            ],
        )
    });
    Ok(out)
}
