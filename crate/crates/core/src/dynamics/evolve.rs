use serde::Serialize;

use super::model::{Generator, LindbladModel};
use crate::error::{Error, Result};
use crate::quantum::{axpy, max_abs_diff, min_eigenvalue, symmetrize, CMatrix, DensityMatrix, Operator, C64};
use crate::tolerances::{EVOLVE_RATE_DT, POSITIVITY_ABORT, RK4_STABILITY, TRACE_DRIFT_TOL};

/// Uniform time grid `t_k = k·dt`, sampled every `stride` steps.
///
/// The final step is always sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_final]` with step `dt`; `t_final` must be a whole
    /// number of steps to within 1e-9 relative.
    pub fn new(t_final: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {dt}")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time {t_final}")));
        }
        let steps = (t_final / dt).round();
        if (steps * dt - t_final).abs() > 1e-9 * t_final.max(dt) {
            return Err(Error::InvalidParameter(format!(
                "final time {t_final} is not a multiple of dt = {dt}"
            )));
        }
        Ok(Self {
            dt,
            steps: steps as usize,
            stride: 1,
        })
    }

    pub fn from_steps(dt: f64, steps: usize) -> Result<Self> {
        Self::new(dt * steps as f64, dt)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn is_sampled(&self, step: usize) -> bool {
        step.is_multiple_of(self.stride) || step == self.steps
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.steps)
            .filter(|&k| self.is_sampled(k))
            .map(|k| k as f64 * self.dt)
            .collect()
    }
}

/// Numerical health of a deterministic run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveDiagnostics {
    /// Largest `|tr ρ − 1|` seen at a sample point.
    pub max_trace_drift: f64,
    /// Largest step-doubling estimate of the local error (max-abs entry).
    pub max_local_error: f64,
    /// Smallest eigenvalue seen at a sample point.
    pub min_eigenvalue: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: EvolveDiagnostics,
}

impl EvolutionResult {
    /// `tr(A ρ(t))` at every sample.
    pub fn expectation(&self, op: &Operator) -> Result<Vec<f64>> {
        self.states.iter().map(|r| r.expect(op)).collect()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("at least the initial state is stored")
    }
}

/// Classical RK4 stepper for a fixed generator.
#[derive(Debug, Clone)]
pub(crate) struct Rk4 {
    gen: Generator,
    k: [CMatrix; 4],
    tmp: CMatrix,
    scratch: CMatrix,
}

impl Rk4 {
    pub(crate) fn new(model: &LindbladModel) -> Self {
        Self::from_generator(Generator::new(model))
    }

    pub(crate) fn from_generator(gen: Generator) -> Self {
        let d = gen.dim();
        let z = CMatrix::zeros(d, d);
        Self {
            gen,
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z.clone(),
            scratch: z,
        }
    }

    /// Deterministic increment `ρ(t+dt) − ρ(t)` written into `out`.
    pub(crate) fn increment(&mut self, rho: &CMatrix, dt: f64, out: &mut CMatrix) {
        let Self { gen, k, tmp, scratch } = self;
        gen.apply_with(rho, &mut k[0], scratch);
        for stage in 1..4 {
            let h = if stage == 3 { dt } else { 0.5 * dt };
            tmp.copy_from(rho);
            axpy(tmp, h, &k[stage - 1]);
            gen.apply_with(tmp, &mut k[stage], scratch);
        }
        out.copy_from(&k[0]);
        axpy(out, 2.0, &k[1]);
        axpy(out, 2.0, &k[2]);
        axpy(out, 1.0, &k[3]);
        *out *= C64::new(dt / 6.0, 0.0);
    }

    /// One symmetrised RK4 step in place.
    pub(crate) fn step(&mut self, rho: &mut CMatrix, dt: f64, inc: &mut CMatrix) {
        self.increment(rho, dt, inc);
        *rho += &*inc;
        symmetrize(rho);
    }
}

/// Check the deterministic step rules for `model` at step `dt`.
pub fn check_step(model: &LindbladModel, dt: f64) -> Result<()> {
    let rate = model.max_rate();
    if rate * dt > EVOLVE_RATE_DT {
        return Err(Error::StepTooLarge(format!(
            "max rate {rate} times dt {dt} exceeds {EVOLVE_RATE_DT}"
        )));
    }
    let stiff = model.stiffness();
    if stiff * dt > RK4_STABILITY {
        return Err(Error::StepTooLarge(format!(
            "generator norm bound {stiff} times dt {dt} exceeds the RK4 stability limit {RK4_STABILITY}"
        )));
    }
    Ok(())
}

/// Integrate the master equation of `model` from `rho0` over `grid`.
///
/// Fixed-step classical RK4 with Hermitian symmetrisation after each step.
/// At every sample point a step-doubling comparison estimates the local
/// error, the trace drift is recorded (never renormalised) and the spectrum
/// is checked for positivity.
pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<EvolutionResult> {
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch("initial state and model".into()));
    }
    rho0.validate()?;
    check_step(model, grid.dt)?;

    let mut rk = Rk4::new(model);
    let d = rho0.dim();
    let mut rho = rho0.matrix().clone();
    let mut inc = CMatrix::zeros(d, d);
    let mut half = CMatrix::zeros(d, d);
    let mut diag = EvolveDiagnostics {
        max_trace_drift: 0.0,
        max_local_error: 0.0,
        min_eigenvalue: rho0.min_eigenvalue(),
        steps: grid.steps,
    };
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];

    for step in 1..=grid.steps {
        let sampled = grid.is_sampled(step);
        if sampled {
            half.copy_from(&rho);
            rk.step(&mut half, 0.5 * grid.dt, &mut inc);
            rk.step(&mut half, 0.5 * grid.dt, &mut inc);
        }
        rk.step(&mut rho, grid.dt, &mut inc);
        if !sampled {
            continue;
        }
        let t = step as f64 * grid.dt;
        diag.max_local_error = diag.max_local_error.max(max_abs_diff(&rho, &half) / 15.0);
        let drift = (rho.trace().re - 1.0).abs();
        diag.max_trace_drift = diag.max_trace_drift.max(drift);
        if !(drift <= TRACE_DRIFT_TOL) {
            return Err(Error::TraceDrift { time: t, drift });
        }
        let min = min_eigenvalue(&rho);
        diag.min_eigenvalue = diag.min_eigenvalue.min(min);
        if !(min >= POSITIVITY_ABORT) {
            return Err(Error::PositivityViolation {
                time: t,
                min_eigenvalue: min,
            });
        }
        times.push(t);
        states.push(DensityMatrix::from_parts(model.space().clone(), rho.clone()));
    }
    Ok(EvolutionResult {
        times,
        states,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{bloch, two_level_closed_form};
    use crate::quantum::{sigma_minus, sigma_plus, thermal_qubit, HilbertSpace};

    fn two_level(gamma: f64, nbar: f64) -> LindbladModel {
        LindbladModel::new(HilbertSpace::qubit())
            .with_dissipator("down", gamma * (nbar + 1.0), sigma_minus())
            .unwrap()
            .with_dissipator("up", gamma * nbar, sigma_plus())
            .unwrap()
    }

    #[test]
    fn grid_validation() {
        let g = TimeGrid::new(1.0, 0.01).unwrap();
        assert_eq!(g.steps, 100);
        assert!(TimeGrid::new(1.0, 0.3).is_err());
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        let g = g.with_stride(30);
        assert_eq!(g.sample_times().len(), 5);
        assert!((g.sample_times()[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frozen_model_keeps_state() {
        let rho = thermal_qubit(0.3).unwrap();
        let m = LindbladModel::new(HilbertSpace::qubit());
        let out = evolve(&m, &rho, &TimeGrid::new(1.0, 0.1).unwrap()).unwrap();
        assert!(out.states.iter().all(|s| s == &rho));
    }

    #[test]
    fn two_level_matches_closed_form() {
        let (gamma, nbar) = (1.0, 1.0);
        let q = HilbertSpace::qubit();
        let rho = DensityMatrix::pure(&q, &[C64::new(0.8, 0.0), C64::new(0.36, 0.48)]).unwrap();
        let x0 = bloch(&rho).unwrap();
        let grid = TimeGrid::new(2.0, 1e-3).unwrap().with_stride(100);
        let out = evolve(&two_level(gamma, nbar), &rho, &grid).unwrap();
        for (t, s) in out.times.iter().zip(&out.states) {
            let x = bloch(s).unwrap();
            let e = two_level_closed_form(x0, gamma, nbar, *t);
            for k in 0..3 {
                assert!((x[k] - e[k]).abs() < 1e-10, "t={t} k={k}");
            }
        }
        assert!(out.diagnostics.max_trace_drift < 1e-12);
        assert!(out.diagnostics.max_local_error < 1e-12);
    }

    #[test]
    fn step_rules_are_enforced() {
        let m = two_level(10.0, 1.0);
        let rho = thermal_qubit(0.3).unwrap();
        let err = evolve(&m, &rho, &TimeGrid::new(1.0, 0.01).unwrap()).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge(_)));
    }
}
