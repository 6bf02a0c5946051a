use rand_distr::{Distribution, StandardNormal};

use super::rng::channel_stream;
use super::{unconditional_model, DiffusiveChannel, MeasurementRecord, Observable, SeedSpec, Series, TrajectoryResult};
use crate::dynamics::{LindbladModel, Rk4, TimeGrid};
use crate::error::{Error, Result};
use crate::quantum::{axpy, c, min_eigenvalue, symmetrize, CMatrix, DensityMatrix, Sparse, C64};
use crate::tolerances::{DIFFUSIVE_RATE_DT, POSITIVITY_ABORT};

pub(crate) fn check_channels(model: &LindbladModel, channels: &[DiffusiveChannel]) -> Result<()> {
    for ch in channels {
        if ch.op.space() != model.space() {
            return Err(Error::SpaceMismatch(format!("channel '{}'", ch.label)));
        }
        let defect = ch.op.hermiticity_defect();
        if defect > crate::tolerances::HERMITIAN_TOL {
            return Err(Error::NonHermitian(format!("channel '{}' defect {defect:e}", ch.label)));
        }
    }
    Ok(())
}

pub(crate) fn sample_observables(
    rho: &CMatrix,
    observables: &[Observable],
    out: &mut [Series],
) {
    for (o, s) in observables.iter().zip(out.iter_mut()) {
        s.values.push(trace_product(o.op.matrix(), rho));
    }
}

pub(crate) fn trace_product(a: &CMatrix, rho: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * rho[(k, i)];
        }
    }
    acc.re
}

pub(crate) fn empty_series(observables: &[Observable]) -> Vec<Series> {
    observables
        .iter()
        .map(|o| Series {
            name: o.name.clone(),
            values: Vec::new(),
        })
        .collect()
}

/// `out = M x` with `M = I + c1 B + c2 B²` and `B = A − a`.
#[allow(clippy::too_many_arguments)]
fn kraus_left(op: &Sparse, a: f64, c1: f64, c2: f64, x: &CMatrix, b: &mut CMatrix, bb: &mut CMatrix, out: &mut CMatrix) {
    b.fill(C64::new(0.0, 0.0));
    op.left_mul_acc(x, b);
    axpy(b, -a, x);
    bb.fill(C64::new(0.0, 0.0));
    op.left_mul_acc(b, bb);
    axpy(bb, -a, b);
    out.copy_from(x);
    axpy(out, c1, b);
    axpy(out, c2, bb);
}

/// Conditional evolution under continuous measurement of `channels`.
///
/// Each step integrates the model with RK4, then applies per channel the
/// measurement map `ρ → MρM` with `M = I + √s B dW + (s/2) B² (dW² − 2dt)`
/// and `B = A − ⟨A⟩`. The map is positive, its mean reproduces `s·D[A]ρ`
/// and its first-order noise is the innovation `√s H[A]ρ dW`. The state is
/// then symmetrised and renormalised. Records use the same `dW` draws.
pub fn simulate_diffusive(
    model: &LindbladModel,
    channels: &[DiffusiveChannel],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    seed: SeedSpec,
    observables: &[Observable],
) -> Result<TrajectoryResult> {
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch("initial state and model".into()));
    }
    rho0.validate()?;
    check_channels(model, channels)?;
    let strength = channels.iter().map(|c| c.strength).fold(0.0, f64::max);
    let rate = model.max_rate();
    if (rate + strength) * grid.dt > DIFFUSIVE_RATE_DT {
        return Err(Error::StepTooLarge(format!(
            "(max rate {rate} + max strength {strength}) * dt {} exceeds {DIFFUSIVE_RATE_DT}",
            grid.dt
        )));
    }
    let full = unconditional_model(model, channels)?;
    crate::dynamics::check_step(&full, grid.dt)?;

    let d = rho0.dim();
    let mut rk = Rk4::new(model);
    let mut rho = rho0.matrix().clone();
    let mut inc = CMatrix::zeros(d, d);
    let mut b = CMatrix::zeros(d, d);
    let mut bb = CMatrix::zeros(d, d);
    let mut half = CMatrix::zeros(d, d);
    let ops: Vec<(Sparse, f64)> = channels
        .iter()
        .map(|ch| (Sparse::from_dense(ch.op.matrix()), ch.strength.sqrt()))
        .collect();
    let mut rngs: Vec<_> = (0..channels.len()).map(|k| seed.rng(channel_stream(k))).collect();
    let mut records: Vec<MeasurementRecord> = channels
        .iter()
        .map(|ch| MeasurementRecord::new(&ch.label, grid.dt, ch.record_noise_scale, grid.steps))
        .collect();
    let mut series = empty_series(observables);
    let mut times = vec![0.0];
    sample_observables(&rho, observables, &mut series);
    let sqrt_dt = grid.dt.sqrt();
    let mut means = vec![0.0; channels.len()];

    for step in 1..=grid.steps {
        for (m, ch) in means.iter_mut().zip(channels) {
            *m = trace_product(ch.op.matrix(), &rho);
        }
        rk.increment(&rho, grid.dt, &mut inc);
        rho += &inc;
        for (k, ch) in channels.iter().enumerate() {
            let xi: f64 = StandardNormal.sample(&mut rngs[k]);
            let dw = xi * sqrt_dt;
            records[k].push(means[k], dw);
            if ops[k].1 == 0.0 {
                continue;
            }
            let c1 = ops[k].1 * dw;
            let c2 = 0.5 * ch.strength * (dw * dw - 2.0 * grid.dt);
            // M is Hermitian, so (Mρ)† = ρM and a second left product gives MρM
            kraus_left(&ops[k].0, means[k], c1, c2, &rho, &mut b, &mut bb, &mut half);
            let right = half.adjoint();
            kraus_left(&ops[k].0, means[k], c1, c2, &right, &mut b, &mut bb, &mut rho);
        }
        symmetrize(&mut rho);
        let tr = rho.trace().re;
        rho /= c(tr);
        if grid.is_sampled(step) {
            let t = step as f64 * grid.dt;
            let min = min_eigenvalue(&rho);
            if min < POSITIVITY_ABORT {
                return Err(Error::PositivityViolation {
                    time: t,
                    min_eigenvalue: min,
                });
            }
            times.push(t);
            sample_observables(&rho, observables, &mut series);
        }
    }
    Ok(TrajectoryResult {
        seed,
        scheme: "diffusive-kraus".into(),
        times,
        observables: series,
        records,
        jump_counts: Vec::new(),
        jumps: Vec::new(),
    })
}
