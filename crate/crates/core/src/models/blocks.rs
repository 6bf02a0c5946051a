use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::TAIL_MASS_LIMIT;

/// Decomposition of a product of two geometric (thermal) photon laws into
/// total-number blocks `N = n1 + n2` and the conditional law of `n = n1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `p(N)` for `N = 0..=n_max`.
    pub p_total: Vec<f64>,
    /// `p(n|N)` for `n = 0..=N`.
    pub p_given_total: Vec<Vec<f64>>,
    /// Mass of the blocks beyond `n_max`.
    pub tail: f64,
}

impl BlockWeights {
    pub fn n_max(&self) -> usize {
        self.p_total.len() - 1
    }

    /// `μ = λ1/λ2` (infinite when `λ2 = 0`).
    pub fn mu(&self) -> f64 {
        self.lambda1 / self.lambda2
    }

    /// Reassembled joint probability of `(n1, n2)`.
    pub fn joint(&self, n1: usize, n2: usize) -> f64 {
        let total = n1 + n2;
        if total > self.n_max() {
            return 0.0;
        }
        self.p_total[total] * self.p_given_total[total][n1]
    }
}

fn geometric(lambda: f64, n: usize) -> f64 {
    (1.0 - lambda) * lambda.powi(n as i32)
}

/// `p(N) = (1−λ1)(1−λ2) Σ_{n=0}^{N} λ1^n λ2^{N−n}`, equal to
/// `(1−λ1)(1−λ2)(λ2^{N+1} − λ1^{N+1})/(λ2 − λ1)` and to the limit
/// `(1−λ)²(N+1)λ^N` when the two factors coincide.
pub fn block_probability(lambda1: f64, lambda2: f64, total: usize) -> f64 {
    let mut acc = 0.0;
    for n in 0..=total {
        acc += lambda1.powi(n as i32) * lambda2.powi((total - n) as i32);
    }
    (1.0 - lambda1) * (1.0 - lambda2) * acc
}

/// `p(n|N) ∝ μ^n` with `μ = λ1/λ2`, normalised over `n = 0..=N`.
///
/// Evaluated in the mirrored form `∝ (1/μ)^{N−n}` when `μ > 1`; `λ1 = λ2`
/// gives the uniform law and `λ2 = 0` puts all weight at `n = N`.
pub fn conditional_probabilities(lambda1: f64, lambda2: f64, total: usize) -> Vec<f64> {
    let raw: Vec<f64> = if lambda1 <= lambda2 {
        let mu = if lambda2 == 0.0 { 1.0 } else { lambda1 / lambda2 };
        (0..=total).map(|n| mu.powi(n as i32)).collect()
    } else {
        let nu = lambda2 / lambda1;
        (0..=total).map(|n| nu.powi((total - n) as i32)).collect()
    };
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / s).collect()
}

/// Block decomposition of `ρ_th(λ1) ⊗ ρ_th(λ2)` truncated at `N ≤ n_max`.
pub fn initial_block_weights(lambda1: f64, lambda2: f64, n_max: usize) -> Result<BlockWeights> {
    for (name, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
        if !(0.0..1.0).contains(&l) {
            return Err(Error::InvalidParameter(format!("{name} = {l} must lie in [0, 1)")));
        }
    }
    let p_total: Vec<f64> = (0..=n_max)
        .map(|n| block_probability(lambda1, lambda2, n))
        .collect();
    let tail = (1.0 - p_total.iter().sum::<f64>()).max(0.0);
    if tail >= TAIL_MASS_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff: n_max,
            tail,
            limit: TAIL_MASS_LIMIT,
        });
    }
    let p_given_total = (0..=n_max)
        .map(|n| conditional_probabilities(lambda1, lambda2, n))
        .collect();
    Ok(BlockWeights {
        lambda1,
        lambda2,
        p_total,
        p_given_total,
        tail,
    })
}

/// Smallest `n_max` whose block tail is below the truncation limit.
pub fn block_cutoff(lambda1: f64, lambda2: f64) -> usize {
    let mut mass = 0.0;
    for n in 0.. {
        mass += block_probability(lambda1, lambda2, n);
        if 1.0 - mass < TAIL_MASS_LIMIT {
            return n;
        }
    }
    unreachable!()
}

/// Boltzmann factor `λ = n̄/(n̄+1)` of a thermal mode with mean `n̄`.
pub fn lambda_from_nbar(nbar: f64) -> f64 {
    nbar / (nbar + 1.0)
}

/// Geometric law of a single mode, exposed for reconstruction checks.
pub fn thermal_probability(lambda: f64, n: usize) -> f64 {
    geometric(lambda, n)
}

/// `⟨Jz(0)⟩ = (n̄1 − n̄2)/2`.
pub fn jz_initial_mean(nbar1: f64, nbar2: f64) -> f64 {
    0.5 * (nbar1 - nbar2)
}

/// High-temperature form `(k_BT1/ħω1 − k_BT2/ħω2)/2`, taking the two
/// reduced temperatures `k_BT/ħω`.
pub fn jz_initial_mean_high_t(reduced_t1: f64, reduced_t2: f64) -> f64 {
    0.5 * (reduced_t1 - reduced_t2)
}

/// `(N̄, ⟨N²⟩)` of the total photon number for thermal inputs:
/// `⟨N²⟩ = 2(N̄1² + N̄2² + N̄1N̄2) + N̄`.
pub fn thermal_n_moments(nbar1: f64, nbar2: f64) -> (f64, f64) {
    let mean = nbar1 + nbar2;
    let second = 2.0 * (nbar1 * nbar1 + nbar2 * nbar2 + nbar1 * nbar2) + mean;
    (mean, second)
}

/// Which constant term to use in the semiclassical equation for `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemiclassicalVariant {
    /// `−(3Γ/2)(N̄+1)` as printed.
    Printed,
    /// `−(3Γ/4)(N̄+2)`, from `−Γ(⟨N²⟩ + 2N̄)/(2N̄)` with `⟨N²⟩ = 3N̄²/2 + N̄`.
    Derived,
}

/// `ż = c(N̄) + (ΓN̄/2) z² − Γ(2n̄+1) z` with the constant `c` chosen by `variant`.
pub fn semiclassical_rhs(
    z: f64,
    gamma: f64,
    nbar: f64,
    nbar_total: f64,
    variant: SemiclassicalVariant,
) -> Result<f64> {
    if !(z.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("z = {z} outside [-1, 1]")));
    }
    let constant = match variant {
        SemiclassicalVariant::Printed => -1.5 * gamma * (nbar_total + 1.0),
        SemiclassicalVariant::Derived => -0.75 * gamma * (nbar_total + 2.0),
    };
    Ok(constant + 0.5 * gamma * nbar_total * z * z - gamma * (2.0 * nbar + 1.0) * z)
}
