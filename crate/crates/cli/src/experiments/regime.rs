use machclock::clocks::{
    delta_s, delta_s_from_divergence, kl_divergence, kl_high_t, mu_coefficient, regime_check, thermal_populations,
};

use super::{Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

/// Clock signal `2γt` against the measurement noise for several divergences,
/// plus the divergence form of the noise checked against `2√(μΓt)`.
pub(super) fn run(params: &mut Params, _run: &RunSettings) -> Result<Outcome, CliError> {
    let gm = params.checked("model.Gamma", 1e-3, |v| v > 0.0 && v.is_finite(), "positive")?;
    let gamma = params.checked("model.gamma", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let divergences = params.list("model.divergences", &[0.01, 0.03, 0.1, 0.3, 1.0])?;
    if divergences.iter().any(|d| !(*d > 0.0)) {
        return Err(params.error("model.divergences", "every value must be positive").into());
    }
    let b1 = params.get("model.beta1_eps", 0.02)?;
    let b2 = params.get("model.beta2_eps", 0.04)?;
    if b1 == b2 {
        return Err(params.error("model.beta2_eps", "the two temperatures must differ").into());
    }
    let t_min = params.checked("run.t_min", 0.01, |v| v > 0.0, "positive")?;
    let t_max = params.checked("run.t_max", 0.1, |v| v > 0.0, "positive")?;
    if t_max < t_min {
        return Err(params.error("run.t_max", "must not be below run.t_min").into());
    }
    let points: usize = params.get("run.points", 10)?;
    if points < 2 {
        return Err(params.error("run.points", "need at least 2 points").into());
    }
    params.finish()?;

    let times: Vec<f64> = (0..points)
        .map(|k| t_min + (t_max - t_min) * k as f64 / (points - 1) as f64)
        .collect();
    let mut cols = vec![("t".to_string(), times.clone())];
    let mut reports = Vec::new();
    for &d in &divergences {
        let r = regime_check(gm, gamma, d, &times)?;
        if cols.len() == 1 {
            cols.push(("signal".into(), r.signal.clone()));
        }
        cols.push((format!("noise_D{d}"), r.noise.clone()));
        reports.push(r);
    }
    let mut out = Outcome::default();
    let threshold = (2.0 * gm / gamma).sqrt();
    out.estimate("sqrt_2Gamma_over_gamma", threshold);
    out.estimate("reports", &reports);
    out.checks.push(Check::at_least(
        "reversed_inequality_matches_fraction",
        reports.iter().filter(|r| r.reversed_matches).count() as f64 / reports.len() as f64,
        1.0,
    ));

    // divergence form of the noise at high temperature
    let z = |b: f64| -(0.5 * b).tanh();
    let mu = mu_coefficient(z(b1), z(b2))?;
    let d_true = kl_divergence(&thermal_populations(b1), &thermal_populations(b2))?;
    let d_high = kl_high_t(b1, b2);
    let t = t_max;
    let reference = delta_s(gm, t, mu)?;
    let via_true = delta_s_from_divergence(gm, t, d_true);
    let via_high = delta_s_from_divergence(gm, t, d_high);
    out.estimate(
        "divergence_identity",
        serde_json::json!({
            "mu": mu,
            "kl_divergence": d_true,
            "kl_divergence_high_t": d_high,
            "delta_s_mu": reference,
            "delta_s_true_divergence": via_true,
            "delta_s_high_t_divergence": via_high,
        }),
    );
    out.checks.push(Check::at_most("identity_true_divergence_rel", (via_true / reference - 1.0).abs(), 0.01));
    out.checks.push(Check::at_most("identity_high_t_divergence_rel", (via_high / reference - 1.0).abs(), 0.01));

    out.series = Table::from_columns(cols);
    let s = &out.series;
    let lines: Vec<(String, Vec<f64>)> = s.columns[1..]
        .iter()
        .map(|c| (c.clone(), s.column(c).unwrap_or_default()))
        .collect();
    out.plots.push(Plot {
        lines,
        ..Plot::new("regime", "clock signal and noise", "S", times, Vec::new())
    });
    Ok(out)
}
