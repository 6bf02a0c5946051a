use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::diffusive::{check_channels, empty_series};
use super::rng::{channel_stream, EVENT_STREAM};
use super::{DiffusiveChannel, JumpEvent, MeasurementRecord, Observable, SeedSpec, Series, TrajectoryResult};
use crate::dynamics::{LindbladModel, TimeGrid};
use crate::error::{Error, Result};
use crate::tolerances::CLASSICAL_FILTER_RATE_DT;

/// Markov chain on the basis states of a classical-diagonal model.
#[derive(Debug, Clone)]
pub(crate) struct ClassicalChain {
    /// Per state: `(target, rate, dissipator index)`; self-loops included.
    pub(crate) out: Vec<Vec<(usize, f64, usize)>>,
    pub(crate) exit: Vec<f64>,
}

impl ClassicalChain {
    pub(crate) fn from_model(model: &LindbladModel) -> Result<Self> {
        if !model.hamiltonian().is_diagonal(0.0) {
            return Err(Error::InvalidParameter("Hamiltonian is not diagonal".into()));
        }
        let d = model.space().dim();
        let mut out = vec![Vec::new(); d];
        for (k, diss) in model.dissipators().iter().enumerate() {
            if !diss.op.is_monomial() {
                return Err(Error::InvalidParameter(format!(
                    "jump operator '{}' does not map basis states to basis states",
                    diss.label
                )));
            }
            if diss.rate == 0.0 {
                continue;
            }
            let m = diss.op.matrix();
            for (i, transitions) in out.iter_mut().enumerate() {
                for j in 0..d {
                    let w = m[(j, i)].norm_sqr();
                    if w > 0.0 {
                        transitions.push((j, diss.rate * w, k));
                    }
                }
            }
        }
        let exit = out.iter().map(|t| t.iter().map(|x| x.1).sum()).collect();
        Ok(Self { out, exit })
    }

    pub(crate) fn dim(&self) -> usize {
        self.exit.len()
    }

    /// Largest rate of leaving a state (self-loops excluded).
    pub(crate) fn max_leave_rate(&self) -> f64 {
        self.out
            .iter()
            .enumerate()
            .map(|(i, t)| t.iter().filter(|x| x.0 != i).map(|x| x.1).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub(crate) fn generator(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut q = DMatrix::zeros(d, d);
        for (i, t) in self.out.iter().enumerate() {
            for &(j, r, _) in t {
                if j != i {
                    q[(j, i)] += r;
                    q[(i, i)] -= r;
                }
            }
        }
        q
    }

    /// `exp(Q t)` by uniformisation (neglected Poisson mass below 1e-17).
    pub(crate) fn transition_matrix(&self, t: f64) -> DMatrix<f64> {
        let q = self.generator();
        let d = self.dim();
        let rate = self.max_leave_rate();
        let id = DMatrix::<f64>::identity(d, d);
        if rate == 0.0 {
            return id;
        }
        let step = &id + &q / rate;
        let lt = rate * t;
        let mut weight = (-lt).exp();
        let mut power = id.clone();
        let mut out = &id * weight;
        let mut k = 0usize;
        // geometric bound on the Poisson tail once past the mode
        let tail = |w: f64, k: usize| {
            let r = lt / (k + 1) as f64;
            if r < 1.0 {
                w * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        };
        while tail(weight, k) > 1e-17 && k < 100_000 {
            k += 1;
            power = &step * &power;
            weight *= lt / k as f64;
            out += &power * weight;
        }
        out
    }

    fn sample_initial(rng: &mut ChaCha8Rng, pops: &[f64]) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in pops.iter().enumerate() {
            acc += p.max(0.0);
            if u < acc {
                return i;
            }
        }
        pops.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    /// Exact path on `[0, t_final]`: initial state and `(time, new state, dissipator)` events.
    pub(crate) fn sample_path(
        &self,
        rng: &mut ChaCha8Rng,
        pops: &[f64],
        t_final: f64,
    ) -> (usize, Vec<(f64, usize, usize)>) {
        let start = Self::sample_initial(rng, pops);
        let mut state = start;
        let mut t = 0.0;
        let mut events = Vec::new();
        loop {
            let total = self.exit[state];
            if total <= 0.0 {
                break;
            }
            let tau: f64 = Exp1.sample(rng);
            t += tau / total;
            if t > t_final {
                break;
            }
            let mut u = rng.random::<f64>() * total;
            let trans = &self.out[state];
            let mut chosen = trans[trans.len() - 1];
            for &tr in trans {
                if u < tr.1 {
                    chosen = tr;
                    break;
                }
                u -= tr.1;
            }
            state = chosen.0;
            events.push((t, state, chosen.2));
        }
        (start, events)
    }
}

/// Exact (Gillespie) jump trajectory of a classical-diagonal model.
pub(crate) fn gillespie_trajectory(
    model: &LindbladModel,
    chain: &ClassicalChain,
    pops: &[f64],
    grid: &TimeGrid,
    seed: SeedSpec,
    observables: &[Observable],
) -> TrajectoryResult {
    let mut rng = seed.rng(EVENT_STREAM);
    let t_final = grid.t_final();
    let (start, events) = chain.sample_path(&mut rng, pops, t_final);
    let sample_times = grid.sample_times();
    let labels: Vec<String> = model.dissipators().iter().map(|d| d.label.clone()).collect();
    let mut counts = vec![0u64; labels.len()];
    let mut count_series: Vec<Vec<u64>> = vec![Vec::with_capacity(sample_times.len()); labels.len()];
    let mut series = empty_series(observables);
    let mut state = start;
    let mut next = 0usize;
    for &t in &sample_times {
        while next < events.len() && events[next].0 <= t {
            state = events[next].1;
            counts[events[next].2] += 1;
            next += 1;
        }
        for (o, s) in observables.iter().zip(series.iter_mut()) {
            s.values.push(o.op.matrix()[(state, state)].re);
        }
        for (c, s) in counts.iter().zip(count_series.iter_mut()) {
            s.push(*c);
        }
    }
    TrajectoryResult {
        seed,
        scheme: "jump-gillespie".into(),
        times: sample_times,
        observables: series,
        records: Vec::new(),
        jump_counts: labels.into_iter().zip(count_series).collect(),
        jumps: events
            .iter()
            .map(|&(time, _, channel)| JumpEvent { time, channel })
            .collect(),
    }
}

/// Diffusive measurement of diagonal observables on a classical-diagonal model.
///
/// The hidden basis-state path is sampled exactly. Each channel observes
/// `ΔY = ∫ a(x_s) ds + σ √dt ξ` with `σ = 1/(2√s)`, the observation noise
/// whose Kushner–Stratonovich filter coincides with the conditional master
/// equation restricted to diagonal states. The filter applies the Gaussian
/// likelihood of each step and then the exact Markov transition `exp(Q dt)`.
/// The innovation `dW = (ΔY − ⟨a⟩dt)/σ` drives the published record
/// `dy = ⟨a⟩dt + record_noise_scale·dW`.
pub fn simulate_diffusive_classical(
    model: &LindbladModel,
    channels: &[DiffusiveChannel],
    rho0: &crate::quantum::DensityMatrix,
    grid: &TimeGrid,
    seed: SeedSpec,
    observables: &[Observable],
) -> Result<TrajectoryResult> {
    if rho0.space() != model.space() {
        return Err(Error::SpaceMismatch("initial state and model".into()));
    }
    rho0.validate()?;
    check_channels(model, channels)?;
    if !rho0.is_diagonal(0.0) {
        return Err(Error::InvalidState("initial state is not diagonal".into()));
    }
    for ch in channels {
        if !ch.op.is_diagonal(0.0) {
            return Err(Error::InvalidParameter(format!(
                "channel '{}' does not measure a diagonal observable",
                ch.label
            )));
        }
    }
    let chain = ClassicalChain::from_model(model)?;
    let rate = chain.max_leave_rate();
    if rate * grid.dt > CLASSICAL_FILTER_RATE_DT {
        return Err(Error::StepTooLarge(format!(
            "max transition rate {rate} times dt {} exceeds {CLASSICAL_FILTER_RATE_DT}",
            grid.dt
        )));
    }
    let transition = chain.transition_matrix(grid.dt);
    let d = chain.dim();
    let pops = rho0.populations();
    let mut event_rng = seed.rng(EVENT_STREAM);
    let (start, events) = chain.sample_path(&mut event_rng, &pops, grid.t_final());

    let diag: Vec<Vec<f64>> = channels
        .iter()
        .map(|ch| (0..d).map(|i| ch.op.matrix()[(i, i)].re).collect())
        .collect();
    let sigma: Vec<f64> = channels
        .iter()
        .map(|ch| if ch.strength > 0.0 { 0.5 / ch.strength.sqrt() } else { f64::INFINITY })
        .collect();
    let mut rngs: Vec<_> = (0..channels.len()).map(|k| seed.rng(channel_stream(k))).collect();
    let mut records: Vec<MeasurementRecord> = channels
        .iter()
        .map(|ch| MeasurementRecord::new(&ch.label, grid.dt, ch.record_noise_scale, grid.steps))
        .collect();
    let obs_diag: Vec<Vec<f64>> = observables
        .iter()
        .map(|o| (0..d).map(|i| o.op.matrix()[(i, i)].re).collect())
        .collect();
    let push_obs = |p: &DVector<f64>, series: &mut [Series]| {
        for (od, s) in obs_diag.iter().zip(series.iter_mut()) {
            s.values.push(od.iter().zip(p.iter()).map(|(a, b)| a * b).sum());
        }
    };

    let mut p = DVector::from_vec(pops.clone());
    let mut series = empty_series(observables);
    push_obs(&p, &mut series);
    let mut times = vec![0.0];
    let mut state = start;
    let mut next = 0usize;
    let sqrt_dt = grid.dt.sqrt();
    let mut log_w = vec![0.0; d];
    let labels: Vec<String> = model.dissipators().iter().map(|x| x.label.clone()).collect();
    let mut counts = vec![0u64; labels.len()];
    let mut count_series: Vec<Vec<u64>> = vec![vec![0]; labels.len()];

    for step in 1..=grid.steps {
        let t0 = (step - 1) as f64 * grid.dt;
        let t1 = step as f64 * grid.dt;
        // time spent in each hidden state during the step
        let mut occupancy: Vec<(usize, f64)> = Vec::with_capacity(2);
        let mut now = t0;
        while next < events.len() && events[next].0 <= t1 {
            occupancy.push((state, events[next].0 - now));
            now = events[next].0;
            state = events[next].1;
            counts[events[next].2] += 1;
            next += 1;
        }
        occupancy.push((state, t1 - now));

        log_w.iter_mut().for_each(|w| *w = 0.0);
        for (k, a) in diag.iter().enumerate() {
            let xi: f64 = StandardNormal.sample(&mut rngs[k]);
            let mean: f64 = a.iter().zip(p.iter()).map(|(x, q)| x * q).sum();
            if sigma[k].is_infinite() {
                records[k].push(mean, xi * sqrt_dt);
                continue;
            }
            let signal: f64 = occupancy.iter().map(|&(s, span)| a[s] * span).sum();
            let dy_obs = signal + sigma[k] * sqrt_dt * xi;
            records[k].push(mean, (dy_obs - mean * grid.dt) / sigma[k]);
            let inv_var = 1.0 / (sigma[k] * sigma[k]);
            for (i, w) in log_w.iter_mut().enumerate() {
                *w += (a[i] * dy_obs - 0.5 * a[i] * a[i] * grid.dt) * inv_var;
            }
        }
        let top = log_w
            .iter()
            .zip(p.iter())
            .filter(|(_, q)| **q > 0.0)
            .map(|(w, _)| *w)
            .fold(f64::NEG_INFINITY, f64::max);
        for (q, w) in p.iter_mut().zip(&log_w) {
            *q *= (w - top).exp();
        }
        let total = p.sum();
        p /= total;
        p = &transition * &p;
        let total = p.sum();
        p /= total;

        if grid.is_sampled(step) {
            times.push(t1);
            push_obs(&p, &mut series);
            for (c, s) in counts.iter().zip(count_series.iter_mut()) {
                s.push(*c);
            }
        }
    }
    Ok(TrajectoryResult {
        seed,
        scheme: "diffusive-classical-filter".into(),
        times,
        observables: series,
        records,
        jump_counts: labels.into_iter().zip(count_series).collect(),
        jumps: events
            .iter()
            .map(|&(time, _, channel)| JumpEvent { time, channel })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_number_measurement, build_optomech_adiabatic, OptomechParams, Sign};
    use crate::quantum::{DensityMatrix, HilbertSpace};

    fn small_chain() -> (LindbladModel, ClassicalChain) {
        let p = OptomechParams::new(0.5, 1.0, 1.0);
        let m = build_optomech_adiabatic(&p, Sign::Plus, (3, 3)).unwrap();
        let chain = ClassicalChain::from_model(&m).unwrap();
        (m, chain)
    }

    #[test]
    fn transition_matrix_is_stochastic_and_composes() {
        let (_, chain) = small_chain();
        let p1 = chain.transition_matrix(0.3);
        let p2 = chain.transition_matrix(0.6);
        for j in 0..chain.dim() {
            assert!((p1.column(j).sum() - 1.0).abs() < 1e-12);
        }
        assert!((&p1 * &p1 - &p2).amax() < 1e-12);
        // first order: I + Q dt
        let q = chain.generator();
        let small = chain.transition_matrix(1e-6);
        let lin = DMatrix::identity(chain.dim(), chain.dim()) + &q * 1e-6;
        assert!((small - lin).amax() < 1e-9);
    }

    #[test]
    fn path_respects_conserved_total() {
        let (m, chain) = small_chain();
        let space = m.space().clone();
        let start = space.flatten(&[1, 1]);
        let mut pops = vec![0.0; space.dim()];
        pops[start] = 1.0;
        let mut rng = SeedSpec::new(5, 0).rng(EVENT_STREAM);
        let (s0, events) = chain.sample_path(&mut rng, &pops, 50.0);
        assert_eq!(s0, start);
        assert!(!events.is_empty());
        for (_, s, _) in events {
            let idx = space.unflatten(s);
            assert_eq!(idx[0] + idx[1], 2);
        }
    }

    #[test]
    fn strong_filter_follows_hidden_state() {
        let p = OptomechParams::new(0.05, 1.0, 1.0);
        let base = build_optomech_adiabatic(&p, Sign::Plus, (4, 4)).unwrap();
        let nm = build_number_measurement(&base, 1000.0).unwrap();
        let space = HilbertSpace::new(vec![4, 4]).unwrap();
        let rho = DensityMatrix::basis_state(&space, space.flatten(&[2, 1])).unwrap();
        let grid = TimeGrid::new(20.0, 0.004).unwrap();
        let ops = crate::models::CavityOps::new(&space).unwrap();
        let obs = [Observable::new("n1", ops.n1.clone())];
        let r = simulate_diffusive_classical(&nm.model, std::slice::from_ref(&nm.channel), &rho, &grid, SeedSpec::new(2, 0), &obs)
            .unwrap();
        let rec = r.record("n1").unwrap();
        assert_eq!(rec.increments.len(), grid.steps);
        assert!(rec.consistency_defect() < 1e-12);
        let n1 = r.observable("n1").unwrap();
        assert!((n1[0] - 2.0).abs() < 1e-12);
        // conditional mean sits near an integer most of the time
        let near = n1.iter().filter(|v| (*v - v.round()).abs() < 0.1).count();
        assert!(near as f64 > 0.9 * n1.len() as f64);
    }

    #[test]
    fn rejects_non_diagonal_inputs() {
        let (m, _) = small_chain();
        let nm = build_number_measurement(&m, 10.0).unwrap();
        let plus = DensityMatrix::maximally_mixed(m.space());
        let grid = TimeGrid::new(1.0, 1e-3).unwrap();
        assert!(simulate_diffusive_classical(&nm.model, std::slice::from_ref(&nm.channel), &plus, &grid, SeedSpec::new(1, 0), &[]).is_ok());
        let big = TimeGrid::new(1.0, 0.1).unwrap();
        assert!(matches!(
            simulate_diffusive_classical(&nm.model, &[nm.channel], &plus, &big, SeedSpec::new(1, 0), &[]),
            Err(Error::StepTooLarge(_))
        ));
    }
}
