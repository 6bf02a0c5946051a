use machclock::dynamics::{evolve, LindbladModel, TimeGrid};
use machclock::models::{build_number_measurement, build_optomech_adiabatic, CavityOps, OptomechParams, Sign};
use machclock::trajectories::{
    ensemble_run, moving_average, simulate_diffusive, simulate_diffusive_classical, simulate_jump, JumpScheme,
    Observable, SeedSpec, Series, TrajectoryResult,
};
use machclock::{DensityMatrix, HilbertSpace};

use super::{ensemble_options, record_table, time_grid, Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

/// Parameters shared by the two cavity experiments.
struct Cavities {
    params: OptomechParams,
    sign: Sign,
    cutoffs: (usize, usize),
    initial: Initial,
}

enum Initial {
    Fock(usize, usize),
    Thermal(f64, f64),
}

fn read_cavities(params: &mut Params, g: f64, gamma_m: f64) -> Result<Cavities, CliError> {
    let g = params.checked("model.g", g, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let gamma_m = params.checked("model.gamma_m", gamma_m, |v| v > 0.0 && v.is_finite(), "positive")?;
    let nbar = params.checked("model.nbar", 1.0, |v| v >= 0.0 && v.is_finite(), "non-negative")?;
    let sign = match params.get("model.sign", "plus".to_string())?.as_str() {
        "plus" => Sign::Plus,
        "minus" => Sign::Minus,
        other => return Err(params.error("model.sign", format!("'{other}' is not one of plus, minus")).into()),
    };
    let c1: usize = params.get("model.cutoff1", 4)?;
    let c2: usize = params.get("model.cutoff2", 4)?;
    let initial = match params.get("model.initial", "fock".to_string())?.as_str() {
        "fock" => {
            let n1: usize = params.get("model.n1_0", 2)?;
            let n2: usize = params.get("model.n2_0", 1)?;
            if n1 >= c1 || n2 >= c2 {
                return Err(params.error("model.n1_0", format!("Fock state ({n1}, {n2}) exceeds cutoffs ({c1}, {c2})")).into());
            }
            Initial::Fock(n1, n2)
        }
        "thermal" => Initial::Thermal(params.get("model.nbar1", 0.5)?, params.get("model.nbar2", 0.2)?),
        other => return Err(params.error("model.initial", format!("'{other}' is not one of fock, thermal")).into()),
    };
    Ok(Cavities {
        params: OptomechParams::new(g, gamma_m, nbar),
        sign,
        cutoffs: (c1, c2),
        initial,
    })
}

impl Cavities {
    fn model(&self) -> machclock::Result<LindbladModel> {
        build_optomech_adiabatic(&self.params, self.sign, self.cutoffs)
    }

    fn state(&self, space: &HilbertSpace) -> machclock::Result<DensityMatrix> {
        match self.initial {
            Initial::Fock(n1, n2) => DensityMatrix::basis_state(space, space.flatten(&[n1, n2])),
            Initial::Thermal(a, b) => {
                let r = machclock::quantum::thermal_mode(a, self.cutoffs.0)?
                    .kron(&machclock::quantum::thermal_mode(b, self.cutoffs.1)?)?;
                // the truncated product is renormalised onto the cutoff box
                let t = r.trace();
                DensityMatrix::diagonal(space, &r.populations().iter().map(|p| p / t).collect::<Vec<_>>())
            }
        }
    }
}

fn scheme(params: &mut Params) -> Result<JumpScheme, CliError> {
    match params.get("model.scheme", "auto".to_string())?.as_str() {
        "auto" => Ok(JumpScheme::Auto),
        "bernoulli" => Ok(JumpScheme::Bernoulli),
        "gillespie" => Ok(JumpScheme::Gillespie),
        other => Err(params.error("model.scheme", format!("'{other}' is not one of auto, bernoulli, gillespie")).into()),
    }
}

/// Photon-exchange jumps between the two cavities after eliminating the
/// mechanics, checked against the master equation.
pub(super) fn run_jump(params: &mut Params, run: &RunSettings) -> Result<Outcome, CliError> {
    let cav = read_cavities(params, 0.5, 10.0)?;
    let scheme = scheme(params)?;
    let grid = time_grid(params, 20.0, 0.01, 100)?;
    params.finish()?;

    let mut out = Outcome::default();
    out.warnings.extend(cav.params.validate()?);
    let model = cav.model()?;
    let space = model.space().clone();
    let rho0 = cav.state(&space)?;
    let ops = CavityOps::new(&space)?;
    let observables = [
        Observable::new("n1", ops.n1.clone()),
        Observable::new("n2", ops.n2.clone()),
        Observable::new("N", ops.total_number()),
    ];
    let exact = evolve(&model, &rho0, &grid)?;
    let gap = grid.dt * grid.stride as f64;

    let job = |seed: SeedSpec| -> machclock::Result<TrajectoryResult> {
        let mut r = simulate_jump(&model, &rho0, &grid, seed, &observables, scheme)?;
        let n1 = r.observable("n1").unwrap_or(&[]).to_vec();
        let n2 = r.observable("n2").unwrap_or(&[]).to_vec();
        let total = r.observable("N").unwrap_or(&[]).to_vec();
        let diff: Vec<f64> = n2.iter().zip(&n1).map(|(a, b)| a - b).collect();
        // forward difference over each sampling interval; 0 at the last point
        let rate: Vec<f64> = (0..diff.len())
            .map(|k| if k + 1 < diff.len() { (diff[k + 1] - diff[k]) / gap } else { 0.0 })
            .collect();
        let drift: Vec<f64> = total.iter().map(|v| (v - total[0]).abs()).collect();
        r.observables.push(Series { name: "diff".into(), values: diff });
        r.observables.push(Series { name: "diff_rate".into(), values: rate });
        r.observables.push(Series { name: "N_drift".into(), values: drift });
        Ok(r)
    };
    let ens = ensemble_run(&job, ensemble_options(run, 1))?;
    let stat = |n: &str| ens.observable(n).expect("observable is recorded").clone();
    let (n1, n2, diff, rate, drift) = (stat("n1"), stat("n2"), stat("diff"), stat("diff_rate"), stat("N_drift"));

    let diff_op = &ops.n2 - &ops.n1;
    let hop12 = ops.hop_12();
    let hop21 = ops.hop_21();
    let (r12, r21) = (
        model.dissipator("n12").map_or(0.0, |d| d.rate),
        model.dissipator("n21").map_or(0.0, |d| d.rate),
    );
    let exact_diff = exact.expectation(&diff_op)?;
    let mut exact_rate = Vec::with_capacity(exact_diff.len());
    let mut half_rate = Vec::new();
    let mut current = Vec::new();
    let mut identity_err = 0.0f64;
    for (k, rho) in exact.states.iter().enumerate() {
        exact_rate.push(if k + 1 < exact_diff.len() { (exact_diff[k + 1] - exact_diff[k]) / gap } else { 0.0 });
        let drho = model.apply(rho)?;
        let half = 0.5 * (diff_op.matrix() * drho.matrix()).trace().re;
        let i_bar = r12 * rho.expect(&(&hop12.adjoint() * &hop12))? - r21 * rho.expect(&(&hop21.adjoint() * &hop21))?;
        identity_err = identity_err.max((half - i_bar).abs());
        half_rate.push(half);
        current.push(i_bar);
    }
    let intervals = exact_rate.len().saturating_sub(1);
    if run.n_traj >= 2 && intervals > 0 {
        let inside = (0..intervals)
            .filter(|&k| (rate.mean[k] - exact_rate[k]).abs() <= 3.0 * rate.std_err[k].max(1e-300))
            .count();
        out.checks.push(Check::at_least("diff_rate_within_3se_fraction", inside as f64 / intervals as f64, 0.9));
    }
    out.checks.push(Check::at_most("current_identity_max_abs", identity_err, 1e-8));
    out.checks.push(Check::at_most(
        "photon_number_drift",
        drift.mean.iter().copied().fold(0.0, f64::max),
        1e-12,
    ));

    let times = ens.times.clone();
    let mut cols = vec![
        ("t".to_string(), times.clone()),
        ("n1_mean".into(), n1.mean.clone()),
        ("n1_se".into(), n1.std_err.clone()),
        ("n2_mean".into(), n2.mean.clone()),
        ("n2_se".into(), n2.std_err.clone()),
        ("diff_mean".into(), diff.mean.clone()),
        ("diff_se".into(), diff.std_err.clone()),
        ("diff_exact".into(), exact_diff.clone()),
        ("diff_rate_mean".into(), rate.mean.clone()),
        ("diff_rate_se".into(), rate.std_err.clone()),
        ("diff_rate_exact".into(), exact_rate),
        ("half_diff_derivative".into(), half_rate),
        ("current".into(), current),
    ];
    for c in &ens.counts {
        cols.push((format!("count_{}_mean", c.name), c.mean.clone()));
    }
    out.series = Table::from_columns(cols);
    out.estimate("Gamma", cav.params.gamma_eff());
    out.estimate("rates", serde_json::json!({ "n12": r12, "n21": r21 }));
    out.estimate("scheme", &ens.trajectories[0].scheme);
    out.estimate("diagnostics", exact.diagnostics);
    out.plots.push(Plot::new(
        "number_difference",
        "<n2 - n1>: jump ensemble and master equation",
        "n2 - n1",
        times,
        vec![("ensemble", diff.mean), ("master equation", exact_diff)],
    ));
    Ok(out)
}

/// Continuous photon-number read-out of cavity 1 at rate `Λ`.
pub(super) fn run_measure(params: &mut Params, run: &RunSettings) -> Result<Outcome, CliError> {
    let cav = read_cavities(params, 0.05, 1.0)?;
    let lambda = params.checked("model.Lambda", 1000.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let method = params.get("model.scheme", "auto".to_string())?;
    if !["auto", "sme", "classical"].contains(&method.as_str()) {
        return Err(params.error("model.scheme", format!("'{method}' is not one of auto, sme, classical")).into());
    }
    let window: usize = params.get("run.window", 50)?;
    let grid = time_grid(params, 50.0, 0.004, 1)?;
    params.finish()?;

    let mut out = Outcome::default();
    out.warnings.extend(cav.params.validate()?);
    let base = cav.model()?;
    let space = base.space().clone();
    let rho0 = cav.state(&space)?;
    let nm = build_number_measurement(&base, lambda)?;
    let channels = [nm.channel.clone()];
    let ops = CavityOps::new(&space)?;
    let observables = [Observable::new("n1", ops.n1.clone())];
    let classical = match method.as_str() {
        "classical" => true,
        "sme" => false,
        _ => nm.model.is_classical_diagonal(&rho0),
    };
    let max_rate = base.dissipators().iter().map(|d| d.rate * d.op.inf_norm().powi(2)).fold(0.0, f64::max);
    if lambda < 50.0 * max_rate {
        out.warnings.push(format!(
            "Lambda = {lambda} is less than 50 times the largest exchange rate bound {max_rate}; plateaus will blur"
        ));
    }
    let one = TimeGrid::from_steps(grid.dt, 1)?;
    let single = |g: &TimeGrid, seed: SeedSpec| {
        if classical {
            simulate_diffusive_classical(&nm.model, &channels, &rho0, g, seed, &observables)
        } else {
            simulate_diffusive(&nm.model, &channels, &rho0, g, seed, &observables)
        }
    };
    single(&one, SeedSpec::new(0, 0))?;
    let ens = ensemble_run(&|seed: SeedSpec| single(&grid, seed), ensemble_options(run, 1))?;
    let first = &ens.trajectories[0];
    let rec = first.record("n1").expect("n1 channel");
    let signal = rec.signal();
    let avg = moving_average(&signal, window);
    let plateau = avg.iter().filter(|v| (*v - v.round()).abs() <= 0.2).count() as f64 / avg.len().max(1) as f64;

    let exact = evolve(&base, &rho0, &grid.with_stride(1))?;
    let n1_exact = exact.expectation(&ops.n1)?;
    let stats = ens.record("n1").expect("n1 record");
    let steps = stats.mean.len();
    let inside = (0..steps)
        .filter(|&k| (stats.mean[k] - n1_exact[k]).abs() <= 3.0 * stats.std_err[k])
        .count() as f64
        / steps.max(1) as f64;

    out.checks.push(Check::at_least("plateau_fraction", plateau, 0.9));
    if run.n_traj >= 2 {
        out.checks.push(Check::at_least("mean_signal_within_3se_fraction", inside, 0.99));
    }
    out.estimate("Gamma", cav.params.gamma_eff());
    out.estimate("Lambda", lambda);
    out.estimate("scheme", &first.scheme);
    out.estimate("record_noise_scale", rec.noise_scale);

    let times = rec.times();
    let cond = first.observable("n1").unwrap_or(&[]);
    let stride = grid.stride.max(1);
    // observables are sampled on the grid; records exist for every step
    let n1_cond: Vec<f64> = (0..steps).map(|k| if k % stride == 0 { cond[k / stride] } else { f64::NAN }).collect();
    out.series = Table::from_columns(vec![
        ("t".into(), times.clone()),
        ("M_avg".into(), avg.clone()),
        ("n1_conditional".into(), n1_cond.clone()),
        ("M_mean".into(), stats.mean.clone()),
        ("M_se".into(), stats.std_err.clone()),
        ("n1_exact".into(), n1_exact[..steps].to_vec()),
    ]);
    out.records.push(("n1".into(), record_table(rec.dt, &rec.increments)));
    out.plots.push(Plot::new(
        "readout",
        "moving average of the number read-out",
        "M",
        times.clone(),
        vec![("M (moving average)", avg), ("conditional n1", n1_cond)],
    ));
    out.plots.push(Plot::new(
        "mean_signal",
        "mean read-out and master equation",
        "M",
        times,
        vec![("ensemble mean", stats.mean.clone()), ("<n1>", n1_exact[..steps].to_vec())],
    ));
    Ok(out)
}
