use machclock::dynamics::{evolve, LindbladModel};
use machclock::models::{
    adjudicate_semiclassical, block_mixture, classical_birth_death, log_linear_fit, photon_block,
    semiclassical_solution, BirthDeathChain, DickeBlock, SemiclassicalVariant, TwoModeSpin,
};
use machclock::{DensityMatrix, HilbertSpace};

use super::{pow10_floor, time_grid, whole_steps, Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

pub(super) fn run(params: &mut Params, _run: &RunSettings) -> Result<Outcome, CliError> {
    match params.get("model.initial", "top".to_string())?.as_str() {
        "top" => run_top(params),
        "thermal" => run_thermal(params),
        other => Err(params.error("model.initial", format!("'{other}' is not one of top, thermal")).into()),
    }
}

/// RMS of `a − b`.
fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len().max(1) as f64).sqrt()
}

/// Fixed photon number `N = 2j` in two modes, collectively exchanged with a
/// bath: the quantum master equation against the birth–death chain.
fn run_top(params: &mut Params) -> Result<Outcome, CliError> {
    let twice_j: usize = params.get("model.twice_j", 10)?;
    if twice_j == 0 {
        return Err(params.error("model.twice_j", "must be at least 1").into());
    }
    let twice_m0: i64 = params.get("model.twice_m0", twice_j as i64)?;
    if twice_m0.unsigned_abs() as usize > twice_j || (twice_j as i64 - twice_m0) % 2 != 0 {
        return Err(params.error("model.twice_m0", format!("m = {twice_m0}/2 is not a level of j = {twice_j}/2")).into());
    }
    let nbar = params.checked("model.nbar", 0.0, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let gamma = params.checked("model.Gamma", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let j = twice_j as f64 / 2.0;
    let dt0 = pow10_floor(1e-2 / (gamma * (nbar + 1.0) * (j * (j + 1.0) + 1.0)));
    let t0 = whole_steps(4.0 / (gamma * (2.0 * nbar + 1.0) * (twice_j as f64 + 1.0)), dt0);
    let stride = ((t0 / dt0).round() as usize / 200).max(1);
    let grid = time_grid(params, t0, dt0, stride)?;
    params.finish()?;

    let full = HilbertSpace::new(vec![twice_j + 1, twice_j + 1])?;
    let spin = TwoModeSpin::new(&full)?;
    let sub = photon_block(&full, twice_j)?;
    let model = LindbladModel::new(full.clone())
        .with_dissipator("down", gamma * (nbar + 1.0), spin.minus.clone())?
        .with_dissipator("up", gamma * nbar, spin.plus.clone())?
        .restrict(&sub)?;
    let n1 = ((twice_j as i64 + twice_m0) / 2) as usize;
    let target = full.flatten(&[n1, twice_j - n1]);
    let idx = sub.basis().iter().position(|&b| b == target).expect("state lies in its photon block");
    let rho0 = DensityMatrix::basis_state(sub.space(), idx)?;
    let res = evolve(&model, &rho0, &grid)?;
    let jz_q = res.expectation(&spin.z.restrict(&sub)?)?;
    let casimir = res.expectation(&spin.casimir().restrict(&sub)?)?;

    let block = DickeBlock::new(twice_j, nbar, gamma)?;
    let chain: BirthDeathChain = classical_birth_death(&block);
    let mut p0 = vec![0.0; twice_j + 1];
    p0[((twice_j as i64 - twice_m0) / 2) as usize] = 1.0;
    let jz_c = chain.jz_series(&BirthDeathChain::from_spin_populations(&p0), &res.times)?;
    let jz_inf = chain.jz_mean(&chain.stationary());

    let mut out = Outcome::default();
    let agreement = jz_q.iter().zip(&jz_c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let casimir_err = casimir.iter().map(|c| (c - j * (j + 1.0)).abs()).fold(0.0, f64::max);
    out.checks.push(Check::at_most("quantum_vs_classical_jz", agreement, 1e-8));
    out.checks.push(Check::at_most("casimir_drift", casimir_err, 1e-9));

    // single-exponential fit of the relaxation, compared in linear space
    let y0 = jz_c[0] - jz_inf;
    let (mut ft, mut fy) = (Vec::new(), Vec::new());
    for (t, v) in res.times.iter().zip(&jz_c) {
        let y = v - jz_inf;
        if y0.abs() > 0.0 && y / y0 > 1e-6 {
            ft.push(*t);
            fy.push(y / y0);
        }
    }
    let fitted: Vec<f64>;
    if ft.len() >= 3 {
        let (slope, intercept, _) = log_linear_fit(&ft, &fy)?;
        fitted = res.times.iter().map(|t| jz_inf + y0 * (intercept + slope * t).exp()).collect();
        let fit_rms = rms(&fitted, &jz_q);
        let exact_rms = rms(&jz_c, &jz_q).max(f64::MIN_POSITIVE);
        out.estimate("single_exponential_rate", -slope);
        out.estimate("single_exponential_rms", fit_rms);
        out.estimate("exact_curve_rms", exact_rms);
        out.checks.push(Check::at_least("nonexponential_residual_ratio", fit_rms / exact_rms, 10.0));
    } else {
        fitted = vec![f64::NAN; res.times.len()];
    }
    out.estimate("jz_stationary", jz_inf);
    out.estimate("diagnostics", res.diagnostics);
    out.series = Table::from_columns(vec![
        ("t".into(), res.times.clone()),
        ("jz_quantum".into(), jz_q.clone()),
        ("jz_classical".into(), jz_c),
        ("jz_single_exponential".into(), fitted.clone()),
        ("casimir".into(), casimir),
    ]);
    out.plots.push(Plot::new(
        "jz",
        "collective decay of Jz",
        "Jz",
        res.times.clone(),
        vec![("master equation", jz_q), ("single exponential", fitted)],
    ));
    Ok(out)
}

/// Thermal cavities: exact block mixture against the semiclassical equation
/// for `z = ⟨Jz⟩/(N̄/2)`.
fn run_thermal(params: &mut Params) -> Result<Outcome, CliError> {
    let nbar1 = params.checked("model.nbar1", 6.0, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let nbar2 = params.checked("model.nbar2", 4.0, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let nbar = params.checked("model.nbar", 200.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let gamma = params.checked("model.Gamma", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let t_final = params.checked("run.t_final", 5.0 / (2.0 * gamma * nbar), |v| v > 0.0 && v.is_finite(), "positive")?;
    let samples: usize = params.get("run.samples", 200)?;
    if samples < 3 {
        return Err(params.error("run.samples", "need at least 3 samples").into());
    }
    params.finish()?;

    let mix = block_mixture(nbar1, nbar2, nbar, gamma)?;
    let times: Vec<f64> = (0..=samples).map(|k| t_final * k as f64 / samples as f64).collect();
    let j = 0.5 * mix.mean_total();
    let z_exact: Vec<f64> = mix.jz_series(&times)?.into_iter().map(|v| v / j).collect();
    let z_inf = mix.jz_stationary() / j;
    let step = t_final / samples as f64 / 20.0;
    let semi = |v| semiclassical_solution(z_exact[0], gamma, nbar, 2.0 * j, v, &times, step);
    let z_printed = semi(SemiclassicalVariant::Printed)?;
    let z_derived = semi(SemiclassicalVariant::Derived)?;

    let y0 = z_exact[0] - z_inf;
    let (mut ft, mut fy) = (Vec::new(), Vec::new());
    for (t, z) in times.iter().zip(&z_exact) {
        let y = (z - z_inf) / y0;
        if y > 1e-3 {
            ft.push(*t);
            fy.push(y);
        }
    }
    let mut out = Outcome::default();
    if ft.len() >= 3 {
        let (slope, _, resid) = log_linear_fit(&ft, &fy)?;
        let target = 2.0 * gamma * nbar;
        out.estimate("fitted_rate", -slope);
        out.estimate("fit_rms_log", resid);
        out.estimate("rate_2_Gamma_nbar", target);
        out.checks.push(Check::at_most("decay_rate_vs_2_Gamma_nbar", (-slope / target - 1.0).abs(), 0.1));
    }
    out.estimate("mean_total", 2.0 * j);
    out.estimate("z_stationary", z_inf);
    out.estimate("block_tail", mix.weights.tail);
    out.estimate("adjudication", adjudicate_semiclassical(&mix)?);
    out.series = Table::from_columns(vec![
        ("t".into(), times.clone()),
        ("z_exact".into(), z_exact.clone()),
        ("z_semiclassical_printed".into(), z_printed.clone()),
        ("z_semiclassical_derived".into(), z_derived.clone()),
    ]);
    out.plots.push(Plot::new(
        "z",
        "thermal cavities: z = <Jz>/j",
        "z",
        times,
        vec![("block mixture", z_exact), ("semiclassical (printed constant)", z_printed), ("semiclassical (derived constant)", z_derived)],
    ));
    Ok(out)
}
