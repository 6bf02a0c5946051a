use nalgebra::DVector;
use serde::Serialize;

use super::{
    block_cutoff, classical_birth_death, initial_block_weights, lambda_from_nbar, semiclassical_rhs,
    BirthDeathChain, BlockWeights, DickeBlock, SemiclassicalVariant,
};
use crate::error::{Error, Result};

/// Two thermal cavities evolved block by block as birth–death chains.
///
/// Each total `N` is an independent spin-`N/2` chain whose start is
/// `p(n1 = n | N)`; `Jz = n1 − N/2` so chain index and `n1` coincide.
#[derive(Debug, Clone)]
pub struct BlockMixture {
    pub weights: BlockWeights,
    pub nbar1: f64,
    pub nbar2: f64,
    pub nbar: f64,
    pub gamma: f64,
    chains: Vec<BirthDeathChain>,
}

pub fn block_mixture(nbar1: f64, nbar2: f64, nbar: f64, gamma: f64) -> Result<BlockMixture> {
    if !(nbar >= 0.0 && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("nbar = {nbar}, Gamma = {gamma}")));
    }
    let (l1, l2) = (lambda_from_nbar(nbar1), lambda_from_nbar(nbar2));
    let weights = initial_block_weights(l1, l2, block_cutoff(l1, l2))?;
    let chains = (0..=weights.n_max())
        .map(|n| DickeBlock::new(n, nbar, gamma).map(|b| classical_birth_death(&b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockMixture {
        weights,
        nbar1,
        nbar2,
        nbar,
        gamma,
        chains,
    })
}

impl BlockMixture {
    /// `N̄` of the truncated mixture.
    pub fn mean_total(&self) -> f64 {
        let w = &self.weights.p_total;
        w.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / w.iter().sum::<f64>()
    }

    fn start(&self, n: usize) -> DVector<f64> {
        DVector::from_vec(self.weights.p_given_total[n].clone())
    }

    fn norm(&self) -> f64 {
        self.weights.p_total.iter().sum()
    }

    /// `⟨Jz⟩(t)` of the mixture at ascending `times`.
    pub fn jz_series(&self, times: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; times.len()];
        for (n, chain) in self.chains.iter().enumerate() {
            let w = self.weights.p_total[n];
            if w == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(chain.jz_series(&self.start(n), times)?) {
                *o += w * v;
            }
        }
        let z = self.norm();
        Ok(out.into_iter().map(|v| v / z).collect())
    }

    /// Exact `d⟨Jz⟩/dt` at `t = 0`.
    pub fn jz_rate_at_start(&self) -> f64 {
        let mut acc = 0.0;
        for (n, chain) in self.chains.iter().enumerate() {
            let dp = &chain.generator * self.start(n);
            acc += self.weights.p_total[n] * chain.jz_mean(&dp);
        }
        acc / self.norm()
    }

    /// Stationary `⟨Jz⟩` of the mixture.
    pub fn jz_stationary(&self) -> f64 {
        let acc: f64 = self
            .chains
            .iter()
            .enumerate()
            .map(|(n, c)| self.weights.p_total[n] * c.jz_mean(&c.stationary()))
            .sum();
        acc / self.norm()
    }

    /// Exact mean of `−Γ J²/j` with `j = N̄/2`: the constant term of `ż`.
    pub fn constant_term(&self) -> f64 {
        let j_bar = 0.5 * self.mean_total();
        let acc: f64 = self
            .weights
            .p_total
            .iter()
            .enumerate()
            .map(|(n, p)| {
                let j = n as f64 / 2.0;
                p * j * (j + 1.0)
            })
            .sum();
        -self.gamma * acc / self.norm() / j_bar
    }
}

/// `z(t)` from the semiclassical equation, integrated with RK4 sub-steps of
/// at most `max_step`.
pub fn semiclassical_solution(
    z0: f64,
    gamma: f64,
    nbar: f64,
    nbar_total: f64,
    variant: SemiclassicalVariant,
    times: &[f64],
    max_step: f64,
) -> Result<Vec<f64>> {
    let f = |z: f64| semiclassical_rhs(z.clamp(-1.0, 1.0), gamma, nbar, nbar_total, variant);
    let mut z = z0;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < now {
            return Err(Error::InvalidParameter("times must be ascending".into()));
        }
        let span = t - now;
        let steps = (span / max_step).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            if h == 0.0 {
                break;
            }
            let k1 = f(z)?;
            let k2 = f(z + 0.5 * h * k1)?;
            let k3 = f(z + 0.5 * h * k2)?;
            let k4 = f(z + h * k3)?;
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        now = t;
        out.push(z);
    }
    Ok(out)
}

/// Comparison of the two constant-term variants with the exact mixture.
#[derive(Debug, Clone, Serialize)]
pub struct SemiclassicalAdjudication {
    pub z0: f64,
    /// Exact `ż(0)` of the block mixture with `z = ⟨Jz⟩/(N̄/2)`.
    pub exact_rate: f64,
    pub printed_rate: f64,
    pub derived_rate: f64,
    /// Exact `−Γ⟨J²⟩/j` and the two candidate constants.
    pub exact_constant: f64,
    pub printed_constant: f64,
    pub derived_constant: f64,
    /// Variant whose constant is closer to the exact one.
    pub closer: SemiclassicalVariant,
}

pub fn adjudicate_semiclassical(mix: &BlockMixture) -> Result<SemiclassicalAdjudication> {
    let nt = mix.mean_total();
    let j = 0.5 * nt;
    let z0 = mix.jz_series(&[0.0])?[0] / j;
    let exact_rate = mix.jz_rate_at_start() / j;
    let rate = |v| semiclassical_rhs(z0, mix.gamma, mix.nbar, nt, v);
    let printed_rate = rate(SemiclassicalVariant::Printed)?;
    let derived_rate = rate(SemiclassicalVariant::Derived)?;
    let constant = |v| semiclassical_rhs(0.0, mix.gamma, mix.nbar, nt, v);
    let printed_constant = constant(SemiclassicalVariant::Printed)?;
    let derived_constant = constant(SemiclassicalVariant::Derived)?;
    let exact_constant = mix.constant_term();
    let closer = if (printed_constant - exact_constant).abs() < (derived_constant - exact_constant).abs() {
        SemiclassicalVariant::Printed
    } else {
        SemiclassicalVariant::Derived
    };
    Ok(SemiclassicalAdjudication {
        z0,
        exact_rate,
        printed_rate,
        derived_rate,
        exact_constant,
        printed_constant,
        derived_constant,
        closer,
    })
}

/// Least-squares slope and residual RMS of `ln y` against `t`.
pub fn log_linear_fit(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if t.len() != y.len() || t.len() < 2 || y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("need at least two positive samples".into()));
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = linear_fit(t, &ly);
    let rms = (t
        .iter()
        .zip(&ly)
        .map(|(x, v)| (v - intercept - slope * x).powi(2))
        .sum::<f64>()
        / t.len() as f64)
        .sqrt();
    Ok((slope, intercept, rms))
}

/// Ordinary least squares `y ≈ intercept + slope·x`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
