use machclock::dynamics::evolve;
use machclock::models::{build_full_optomech, build_optomech_adiabatic, thermal_cutoff, CavityOps, OptomechParams, Sign};
use machclock::quantum::{thermal_mode, Subspace};
use machclock::DensityMatrix;

use super::{pow10_floor, time_grid, whole_steps, Check, Outcome, Plot, Table};
use crate::config::{Params, RunSettings};
use crate::CliError;

/// Cavities plus damped mechanics against the eliminated cavity-only model.
/// The full model is evolved in the fixed-photon-number sector of the
/// initial Fock state, which the dynamics never leaves.
pub(super) fn run(params: &mut Params, _run: &RunSettings) -> Result<Outcome, CliError> {
    let g = params.checked("model.g", 1.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let gamma_m = params.checked("model.gamma_m", 40.0, |v| v > 0.0 && v.is_finite(), "positive")?;
    let nbar = params.checked("model.nbar", 0.5, |v| v > 0.0 && v.is_finite(), "positive")?;
    let c1: usize = params.get("model.cutoff1", 3)?;
    let c2: usize = params.get("model.cutoff2", 3)?;
    let cm: usize = params.get("model.cutoff_m", thermal_cutoff(nbar))?;
    let n1: usize = params.get("model.n1_0", 2)?;
    let n2: usize = params.get("model.n2_0", 0)?;
    if n1 >= c1 || n2 >= c2 {
        return Err(params.error("model.n1_0", format!("Fock state ({n1}, {n2}) exceeds cutoffs ({c1}, {c2})")).into());
    }
    let p = OptomechParams::new(g, gamma_m, nbar);
    let big = p.gamma_eff();
    let fast = gamma_m * (nbar + 1.0);
    let dt0 = pow10_floor(1e-2 / fast.max(g * (cm as f64).sqrt() * (c1.max(c2) as f64)));
    let t0 = whole_steps(1.0 / big, dt0);
    let stride = ((t0 / dt0).round() as usize / 200).max(1);
    let grid = time_grid(params, t0, dt0, stride)?;
    params.finish()?;

    let mut out = Outcome::default();
    out.warnings.extend(p.validate()?);
    let full = build_full_optomech(&p, (c1, c2, cm))?;
    let space = full.space().clone();
    let total = n1 + n2;
    let sector = Subspace::from_predicate(space.clone(), |l| l[0] + l[1] == total)?;
    let reduced_model = full.restrict(&sector)?;
    let cav_space = machclock::HilbertSpace::new(vec![c1, c2])?;
    let fock = DensityMatrix::basis_state(&cav_space, cav_space.flatten(&[n1, n2]))?;
    let rho_full = fock.kron(&thermal_mode(nbar, cm)?)?;
    let rho_full = DensityMatrix::new(space.clone(), rho_full.matrix().clone())?;
    let res_full = evolve(&reduced_model, &rho_full.restrict(&sector)?, &grid)?;

    let eliminated = build_optomech_adiabatic(&p, Sign::Plus, (c1, c2))?;
    let res_adiabatic = evolve(&eliminated, &fock, &grid)?;
    let ops = CavityOps::new(&cav_space)?;

    let mut distance = Vec::with_capacity(res_full.times.len());
    let (mut n1_full, mut n1_ad) = (Vec::new(), Vec::new());
    for (rho_s, rho_a) in res_full.states.iter().zip(&res_adiabatic.states) {
        let cav = rho_s.lift(&sector)?.partial_trace(&[0, 1])?;
        let cav = DensityMatrix::new(cav_space.clone(), cav.matrix().clone())?;
        distance.push(cav.trace_distance(rho_a)?);
        n1_full.push(cav.expect(&ops.n1)?);
        n1_ad.push(rho_a.expect(&ops.n1)?);
    }
    let gt: Vec<f64> = res_full.times.iter().map(|t| big * t).collect();
    let worst = distance
        .iter()
        .zip(&gt)
        .filter(|(_, x)| **x <= 1.0 + 1e-12)
        .map(|(d, _)| *d)
        .fold(0.0, f64::max);
    out.checks.push(Check::at_most("trace_distance_gamma_t_le_1", worst, 0.05));
    out.estimate("Gamma", big);
    out.estimate("gamma_nbar_over_g", gamma_m * nbar / g);
    out.estimate("mechanical_cutoff", cm);
    out.estimate("sector_dimension", sector.dim());
    out.estimate("max_trace_distance", distance.iter().copied().fold(0.0, f64::max));
    out.estimate("diagnostics_full", res_full.diagnostics);
    out.estimate("diagnostics_adiabatic", res_adiabatic.diagnostics);
    out.series = Table::from_columns(vec![
        ("t".into(), res_full.times.clone()),
        ("Gamma_t".into(), gt),
        ("trace_distance".into(), distance.clone()),
        ("n1_full".into(), n1_full.clone()),
        ("n1_adiabatic".into(), n1_ad.clone()),
    ]);
    out.plots.push(Plot::new(
        "n1",
        "<n1>: full model and eliminated model",
        "n1",
        res_full.times.clone(),
        vec![("full", n1_full), ("eliminated", n1_ad)],
    ));
    out.plots.push(Plot::new("trace_distance", "trace distance of the cavity states", "D", res_full.times, vec![("trace distance", distance)]));
    Ok(out)
}
