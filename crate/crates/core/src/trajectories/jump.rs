use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classical::{gillespie_trajectory, ClassicalChain};
use super::diffusive::{empty_series, sample_observables, trace_product};
use super::rng::EVENT_STREAM;
use super::{JumpEvent, Observable, SeedSpec, TrajectoryResult};
use crate::dynamics::{check_step, Generator, LindbladModel, Rk4, TimeGrid};
use crate::error::{Error, Result};
use crate::quantum::{c, matmul, symmetrize, CMatrix, DensityMatrix, Sparse, C64};
use crate::tolerances::JUMP_PROBABILITY_PER_STEP;

/// How jump times are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpScheme {
    /// Gillespie when the model is classical-diagonal, Bernoulli otherwise.
    #[default]
    Auto,
    /// One jump test per step against the no-jump RK4 evolution.
    Bernoulli,
    /// Exact waiting times; classical-diagonal models only.
    Gillespie,
}

/// Quantum-jump unraveling of `model`, one count sequence per dissipator.
///
/// The Gillespie path samples the initial basis state from the diagonal of
/// `rho0`, so its observables are those of a single basis state.
pub fn simulate_jump(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    seed: SeedSpec,
    observables: &[Observable],
    scheme: JumpScheme,
) -> Result<TrajectoryResult> {
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch("initial state and model".into()));
    }
    rho0.validate()?;
    for o in observables {
        if o.op.space() != model.space() {
            return Err(Error::SpaceMismatch(format!("observable '{}'", o.name)));
        }
    }
    let classical = model.is_classical_diagonal(rho0);
    match scheme {
        JumpScheme::Gillespie if !classical => Err(Error::InvalidParameter(
            "Gillespie sampling needs a diagonal Hamiltonian, monomial jump operators and a diagonal state".into(),
        )),
        JumpScheme::Gillespie | JumpScheme::Auto if classical => {
            let chain = ClassicalChain::from_model(model)?;
            Ok(gillespie_trajectory(model, &chain, &rho0.populations(), grid, seed, observables))
        }
        _ => bernoulli(model, rho0, grid, seed, observables),
    }
}

fn bernoulli(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    seed: SeedSpec,
    observables: &[Observable],
) -> Result<TrajectoryResult> {
    check_step(model, grid.dt)?;
    let d = rho0.dim();
    let mut rk = Rk4::from_generator(Generator::no_jump(model));
    let jumps: Vec<(f64, Sparse, CMatrix)> = model
        .dissipators()
        .iter()
        .map(|x| {
            let a = x.op.matrix();
            (x.rate, Sparse::from_dense(a), matmul(&a.adjoint(), a))
        })
        .collect();
    let mut rng = seed.rng(EVENT_STREAM);
    let mut rho = rho0.matrix().clone();
    let mut inc = CMatrix::zeros(d, d);
    let mut scratch = CMatrix::zeros(d, d);
    let mut probs = vec![0.0; jumps.len()];
    let mut counts = vec![0u64; jumps.len()];
    let mut count_series: Vec<Vec<u64>> = vec![vec![0]; jumps.len()];
    let mut events = Vec::new();
    let mut series = empty_series(observables);
    sample_observables(&rho, observables, &mut series);
    let mut times = vec![0.0];

    for step in 1..=grid.steps {
        let t = step as f64 * grid.dt;
        for (p, (rate, _, ada)) in probs.iter_mut().zip(&jumps) {
            *p = if *rate == 0.0 { 0.0 } else { rate * trace_product(ada, &rho).max(0.0) * grid.dt };
        }
        let total: f64 = probs.iter().sum();
        if total > JUMP_PROBABILITY_PER_STEP {
            return Err(Error::StepTooLarge(format!(
                "jump probability {total} per step at t = {} exceeds {JUMP_PROBABILITY_PER_STEP}",
                t - grid.dt
            )));
        }
        let u: f64 = rng.random();
        if u < total {
            let mut acc = 0.0;
            let mut k = probs.len() - 1;
            for (i, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    k = i;
                    break;
                }
            }
            scratch.fill(C64::new(0.0, 0.0));
            jumps[k].1.left_mul_acc(&rho, &mut scratch);
            rho.fill(C64::new(0.0, 0.0));
            jumps[k].1.right_mul_adj_acc(&scratch, 1.0, &mut rho);
            counts[k] += 1;
            events.push(JumpEvent { time: t, channel: k });
        } else {
            rk.step(&mut rho, grid.dt, &mut inc);
        }
        symmetrize(&mut rho);
        let tr = rho.trace().re;
        rho /= c(tr);
        if grid.is_sampled(step) {
            times.push(t);
            sample_observables(&rho, observables, &mut series);
            for (cnt, s) in counts.iter().zip(count_series.iter_mut()) {
                s.push(*cnt);
            }
        }
    }
    Ok(TrajectoryResult {
        seed,
        scheme: "jump-bernoulli".into(),
        times,
        observables: series,
        records: Vec::new(),
        jump_counts: model
            .dissipators()
            .iter()
            .map(|x| x.label.clone())
            .zip(count_series)
            .collect(),
        jumps: events,
    })
}
