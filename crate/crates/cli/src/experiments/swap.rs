use machclock::clocks::{
    delta_s, kl_divergence, kl_high_t, mu_coefficient, mu_high_t, regime_check, s_statistic, t_from_s,
    thermal_populations, Convention,
};
use machclock::dynamics::TimeGrid;
use machclock::models::{build_swap_model, swap_output_tanh};
use machclock::quantum::thermal_qubit;
use machclock::trajectories::{
    ensemble_run, simulate_diffusive, simulate_z_sde, Observable, SeedSpec, Series, TrajectoryResult,
};

use super::{ensemble_options, pow10_floor, record_table, time_grid, whole_steps, Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Sme,
    Zsde,
}

/// Append the clock statistic `S(t)` to a trajectory.
fn with_s(mut r: TrajectoryResult, z0: (f64, f64)) -> machclock::Result<TrajectoryResult> {
    let (z1, z2) = (r.observable("z1").unwrap_or(&[]), r.observable("z2").unwrap_or(&[]));
    let s = z1
        .iter()
        .zip(z2)
        .map(|(a, b)| s_statistic(*a, *b, z0.0, z0.1))
        .collect::<machclock::Result<Vec<_>>>()?;
    r.observables.push(Series {
        name: "S".into(),
        values: s,
    });
    Ok(r)
}

/// Two qubits at different temperatures mixed by random swaps while both
/// energies are weakly monitored; the decay of `z1 − z2` is the clock.
pub(super) fn run(params: &mut Params, run: &RunSettings) -> Result<Outcome, CliError> {
    let gamma = params.checked("model.gamma", 500.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let gm = params.checked("model.Gamma", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let b1 = params.get("model.beta1_eps", 0.5)?;
    let b2 = params.get("model.beta2_eps", 2.0)?;
    if b1 == b2 {
        return Err(params.error("model.beta2_eps", "the two temperatures must differ").into());
    }
    let mode_name: String = params.get("model.mode", "sme".to_string())?;
    let mode = match mode_name.as_str() {
        "sme" => Mode::Sme,
        "zsde" => Mode::Zsde,
        other => return Err(params.error("model.mode", format!("'{other}' is not one of sme, zsde")).into()),
    };
    let dt0 = pow10_floor(5e-4 / (gamma + 2.0 * gm));
    let grid: TimeGrid = time_grid(params, whole_steps(2.5 / gamma, dt0), dt0, 1)?;
    params.finish()?;

    let swap = build_swap_model(gamma, Some(gm))?;
    let rho0 = thermal_qubit(b1)?.kron(&thermal_qubit(b2)?)?;
    let z0 = (rho0.expect(&swap.z_ops[0])?, rho0.expect(&swap.z_ops[1])?);
    let observables = [
        Observable::new("z1", swap.z_ops[0].clone()),
        Observable::new("z2", swap.z_ops[1].clone()),
    ];
    // surface step-rule violations before fanning out
    match mode {
        Mode::Sme => {
            simulate_diffusive(&swap.model, &swap.channels, &rho0, &TimeGrid::from_steps(grid.dt, 1)?, SeedSpec::new(0, 0), &observables)?;
        }
        Mode::Zsde => {
            simulate_z_sde(z0, gamma, gm, &TimeGrid::from_steps(grid.dt, 1)?, SeedSpec::new(0, 0))?;
        }
    }
    let job = |seed: SeedSpec| -> machclock::Result<TrajectoryResult> {
        let r = match mode {
            Mode::Sme => simulate_diffusive(&swap.model, &swap.channels, &rho0, &grid, seed, &observables)?,
            Mode::Zsde => simulate_z_sde(z0, gamma, gm, &grid, seed)?,
        };
        with_s(r, z0)
    };
    let ens = ensemble_run(&job, ensemble_options(run, 1))?;
    let first = &ens.trajectories[0];
    let times = ens.times.clone();
    let mu = mu_coefficient(z0.0, z0.1)?;
    let s_stats = ens.observable("S").expect("S is appended to every trajectory");
    let s_std = s_stats.std_dev();
    let z1 = first.observable("z1").unwrap_or(&[]).to_vec();
    let z2 = first.observable("z2").unwrap_or(&[]).to_vec();
    let s_exact: Vec<f64> = times.iter().map(|t| (-2.0 * gamma * t).exp()).collect();
    let spread: Vec<f64> = times
        .iter()
        .map(|t| delta_s(gm, *t, mu))
        .collect::<machclock::Result<_>>()?;

    let mut out = Outcome {
        series: Table::from_columns(vec![
            ("t".into(), times.clone()),
            ("z1".into(), z1.clone()),
            ("z2".into(), z2.clone()),
            ("z_minus".into(), z1.iter().zip(&z2).map(|(a, b)| a - b).collect()),
            ("S_mean".into(), s_stats.mean.clone()),
            ("S_std_err".into(), s_stats.std_err.clone()),
            ("S_std".into(), s_std.clone()),
            ("S_exact".into(), s_exact.clone()),
            ("delta_S_short_time".into(), spread.clone()),
        ]),
        ..Default::default()
    };
    for rec in &first.records {
        out.records.push((rec.channel.clone(), record_table(rec.dt, &rec.increments)));
    }

    // short-time window where 1 − 2γt and 2√(μΓt) apply
    let window: Vec<usize> = (1..times.len()).filter(|&k| gamma * times[k] <= 0.1).collect();
    if run.n_traj >= 2 && !window.is_empty() {
        let inside = window
            .iter()
            .filter(|&&k| (s_stats.mean[k] - s_exact[k]).abs() <= 3.0 * s_stats.std_err[k])
            .count();
        out.checks.push(Check::at_least("S_mean_within_3se_fraction", inside as f64 / window.len() as f64, 0.95));
        let k = *window.last().expect("non-empty");
        out.checks.push(Check::at_most("S_std_vs_short_time_law", (s_std[k] / spread[k] - 1.0).abs(), 0.15));
    }

    let t_end = *times.last().unwrap_or(&0.0);
    let s_end = *s_stats.mean.last().unwrap_or(&1.0);
    let ds_end = delta_s(gm, t_end, mu)?;
    let (p1, p2) = (thermal_populations(b1), thermal_populations(b2));
    let d_true = kl_divergence(&p1, &p2)?;
    out.estimate("z0", [z0.0, z0.1]);
    out.estimate("z_out_full_mix", swap_output_tanh(-z0.0, -z0.1));
    out.estimate("mu", mu);
    out.estimate("mu_high_t", mu_high_t(b1, b2)?);
    out.estimate("kl_divergence", d_true);
    out.estimate("kl_divergence_high_t", kl_high_t(b1, b2));
    out.estimate("t_from_S_derived", t_from_s(s_end, gamma, Some(ds_end), Convention::Derived)?);
    out.estimate("t_from_S_printed", t_from_s(s_end, gamma, Some(ds_end), Convention::Printed)?);
    // a coarse grid keeps the summary small
    let positive: Vec<f64> = times.iter().copied().filter(|t| *t > 0.0).collect();
    let coarse: Vec<f64> = positive.iter().step_by((positive.len() / 20).max(1)).copied().collect();
    if !coarse.is_empty() {
        out.estimate("regime", regime_check(gm, gamma, d_true, &coarse)?);
    }
    out.estimate("scheme", &first.scheme);

    out.plots.push(Plot::new(
        "z_minus",
        "conditional z1 - z2 on one trajectory",
        "z1 - z2",
        times.clone(),
        vec![("z1 - z2", out.series.column("z_minus").unwrap_or_default())],
    ));
    out.plots.push(Plot::new(
        "s_statistic",
        "clock statistic S",
        "S",
        times,
        vec![("ensemble mean", s_stats.mean.clone()), ("exp(-2 gamma t)", s_exact)],
    ));
    Ok(out)
}
