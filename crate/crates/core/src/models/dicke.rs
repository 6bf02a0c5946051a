use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::optomech::CavityOps;
use crate::dynamics::LindbladModel;
use crate::error::{Error, Result};
use crate::quantum::{angular_momentum, AngularMomentum, HilbertSpace, Operator, Subspace};

/// Ladder factors at `(j, m)`, given as `2j` and `2m`:
/// `down = j(j+1) − m(m−1)` and `up = j(j+1) − m(m+1)`.
pub fn dicke_rates(twice_j: usize, twice_m: i64) -> Result<(f64, f64)> {
    let tj = twice_j as i64;
    if twice_m.abs() > tj || (tj - twice_m) % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "m = {}/2 is not a level of j = {}/2",
            twice_m, twice_j
        )));
    }
    let j = tj as f64 / 2.0;
    let m = twice_m as f64 / 2.0;
    let base = j * (j + 1.0);
    Ok((base - m * (m - 1.0), base - m * (m + 1.0)))
}

/// One fixed-`j` sector of the collective master equation
/// `Γ(n̄+1)D[J-] + Γn̄D[J+]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeBlock {
    pub twice_j: usize,
    pub nbar: f64,
    pub gamma: f64,
}

impl DickeBlock {
    pub fn new(twice_j: usize, nbar: f64, gamma: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("nbar = {nbar}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("Gamma = {gamma}")));
        }
        Ok(Self {
            twice_j,
            nbar,
            gamma,
        })
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j + 1
    }

    pub fn spin(&self) -> Result<AngularMomentum> {
        angular_momentum(self.twice_j)
    }

    /// Quantum model on the spin-`j` irrep (basis index `i` ↔ `m = j − i`).
    pub fn lindblad_model(&self) -> Result<LindbladModel> {
        let s = self.spin()?;
        LindbladModel::new(s.z.space().clone())
            .with_dissipator("down", self.gamma * (self.nbar + 1.0), s.minus)?
            .with_dissipator("up", self.gamma * self.nbar, s.plus)
    }
}

/// Continuous-time birth–death chain over `m = −j, …, j`, stored with index
/// `k = m + j` (ascending `m`).
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathChain {
    pub twice_j: usize,
    /// Generator `Q` acting on column probability vectors; columns sum to zero.
    pub generator: DMatrix<f64>,
}

/// Populations of the diagonal collective-spin dynamics as a Markov chain.
pub fn classical_birth_death(block: &DickeBlock) -> BirthDeathChain {
    let n = block.dim();
    let down_rate = block.gamma * (block.nbar + 1.0);
    let up_rate = block.gamma * block.nbar;
    let mut q = DMatrix::zeros(n, n);
    for k in 0..n {
        let twice_m = 2 * k as i64 - block.twice_j as i64;
        let (down, up) = dicke_rates(block.twice_j, twice_m).expect("level in range");
        if k > 0 {
            q[(k - 1, k)] += down_rate * down;
            q[(k, k)] -= down_rate * down;
        }
        if k + 1 < n {
            q[(k + 1, k)] += up_rate * up;
            q[(k, k)] -= up_rate * up;
        }
    }
    BirthDeathChain {
        twice_j: block.twice_j,
        generator: q,
    }
}

impl BirthDeathChain {
    pub fn dim(&self) -> usize {
        self.twice_j + 1
    }

    /// `m` value of each state.
    pub fn m_values(&self) -> Vec<f64> {
        let j = self.twice_j as f64 / 2.0;
        (0..self.dim()).map(|k| k as f64 - j).collect()
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..self.dim()).map(|k| -self.generator[(k, k)]).fold(0.0, f64::max)
    }

    pub fn jz_mean(&self, p: &DVector<f64>) -> f64 {
        self.m_values().iter().zip(p.iter()).map(|(m, q)| m * q).sum()
    }

    /// `p(t) = exp(Qt) p0` by uniformisation.
    ///
    /// The interval is split so that each piece has `Λt ≤ 50`; the Poisson
    /// series is summed until a geometric bound on the neglected mass is below 1e-17.
    pub fn evolve(&self, p0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        if p0.len() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "{} probabilities for a chain of {} states",
                p0.len(),
                self.dim()
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("time {t}")));
        }
        let rate = self.max_exit_rate();
        if rate == 0.0 || t == 0.0 {
            return Ok(p0.clone());
        }
        let pieces = ((rate * t) / 50.0).ceil().max(1.0) as usize;
        let dt = t / pieces as f64;
        let mut p = p0.clone();
        for _ in 0..pieces {
            p = self.uniformised_step(&p, rate, dt);
        }
        Ok(p)
    }

    fn uniformised_step(&self, p: &DVector<f64>, rate: f64, dt: f64) -> DVector<f64> {
        let lt = rate * dt;
        let mut weight = (-lt).exp();
        let mut term = p.clone();
        let mut out = p * weight;
        let mut k = 0usize;
        // past the mode the Poisson tail after `weight` is bounded by a
        // geometric series; `1 − mass` itself can stall at rounding level
        let tail = |w: f64, k: usize| {
            let r = lt / (k + 1) as f64;
            if r < 1.0 {
                w * r / (1.0 - r)
            } else {
                f64::INFINITY
            }
        };
        while tail(weight, k) > 1e-17 && k < 10_000 {
            k += 1;
            // term ← (I + Q/Λ) term
            let q_term = self.apply_tridiagonal(&term);
            term.axpy(1.0 / rate, &q_term, 1.0);
            weight *= lt / k as f64;
            out.axpy(weight, &term, 1.0);
        }
        out
    }

    /// `Q p` using the three nonzero bands of the generator.
    fn apply_tridiagonal(&self, p: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let q = &self.generator;
        DVector::from_fn(n, |k, _| {
            let mut acc = q[(k, k)] * p[k];
            if k > 0 {
                acc += q[(k, k - 1)] * p[k - 1];
            }
            if k + 1 < n {
                acc += q[(k, k + 1)] * p[k + 1];
            }
            acc
        })
    }

    /// Evolve to each of `times` (ascending), returning `⟨Jz⟩` at each.
    pub fn jz_series(&self, p0: &DVector<f64>, times: &[f64]) -> Result<Vec<f64>> {
        let mut p = p0.clone();
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            if t < now {
                return Err(Error::InvalidParameter("times must be ascending".into()));
            }
            p = self.evolve(&p, t - now)?;
            now = t;
            out.push(self.jz_mean(&p));
        }
        Ok(out)
    }

    /// Stationary law from detailed balance, `p(m+1)/p(m) = up(m)/down(m+1)`.
    pub fn stationary(&self) -> DVector<f64> {
        let n = self.dim();
        let mut p = DVector::zeros(n);
        p[0] = 1.0;
        for k in 0..n - 1 {
            let up = self.generator[(k + 1, k)];
            let down = self.generator[(k, k + 1)];
            p[k + 1] = if down > 0.0 { p[k] * up / down } else { 0.0 };
        }
        let s = p.sum();
        p / s
    }

    /// Diagonal of a spin-`j` density matrix (descending `m`) as chain
    /// probabilities (ascending `m`).
    pub fn from_spin_populations(pops: &[f64]) -> DVector<f64> {
        DVector::from_iterator(pops.len(), pops.iter().rev().copied())
    }
}

/// Two-mode Schwinger representation `J+ = a1†a2`, `Jz = (n1 − n2)/2`.
#[derive(Debug, Clone)]
pub struct TwoModeSpin {
    pub plus: Operator,
    pub minus: Operator,
    pub z: Operator,
    pub total_number: Operator,
}

impl TwoModeSpin {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let ops = CavityOps::new(space)?;
        Ok(Self {
            plus: ops.hop_21(),
            minus: ops.hop_12(),
            z: (&ops.n1 - &ops.n2).scale_real(0.5),
            total_number: ops.total_number(),
        })
    }

    pub fn casimir(&self) -> Operator {
        let z2 = &self.z * &self.z;
        let pm = &self.plus * &self.minus;
        let mp = &self.minus * &self.plus;
        &z2 + &(&pm + &mp).scale_real(0.5)
    }
}

/// States of two cavities holding exactly `total` photons.
pub fn photon_block(space: &HilbertSpace, total: usize) -> Result<Subspace> {
    Subspace::from_predicate(space.clone(), |l| l[0] + l[1] == total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_factors() {
        assert_eq!(dicke_rates(1, 1).unwrap(), (1.0, 0.0));
        assert_eq!(dicke_rates(1, -1).unwrap(), (0.0, 1.0));
        assert_eq!(dicke_rates(2, 2).unwrap().0, 2.0);
        for tj in 0..12usize {
            let tj_i = tj as i64;
            assert_eq!(dicke_rates(tj, -tj_i).unwrap().0, 0.0);
            assert_eq!(dicke_rates(tj, tj_i).unwrap().1, 0.0);
        }
        assert!(dicke_rates(2, 1).is_err());
        assert!(dicke_rates(2, 4).is_err());
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let chain = classical_birth_death(&DickeBlock::new(7, 1.5, 0.3).unwrap());
        for col in chain.generator.column_iter() {
            assert!(col.sum().abs() < 1e-14);
        }
    }

    #[test]
    fn detailed_balance_ratio() {
        let nbar = 2.0;
        let chain = classical_birth_death(&DickeBlock::new(6, nbar, 1.0).unwrap());
        let p = chain.stationary();
        for k in 0..chain.dim() - 1 {
            assert!((p[k + 1] / p[k] - nbar / (nbar + 1.0)).abs() < 1e-12);
        }
        let later = chain.evolve(&p, 3.0).unwrap();
        assert!((later - &p).amax() < 1e-13);
    }

    #[test]
    fn spin_half_chain_is_two_level() {
        let (gamma, nbar, t) = (1.0, 0.7, 0.9);
        let chain = classical_birth_death(&DickeBlock::new(1, nbar, gamma).unwrap());
        let p = chain.evolve(&DVector::from_vec(vec![0.0, 1.0]), t).unwrap();
        let big = gamma * (2.0 * nbar + 1.0);
        let x_inf = -1.0 / (2.0 * nbar + 1.0);
        let x3 = x_inf + (1.0 - x_inf) * (-big * t).exp();
        assert!((2.0 * chain.jz_mean(&p) - x3).abs() < 1e-14);
    }

    #[test]
    fn schwinger_casimir() {
        let space = HilbertSpace::new(vec![5, 5]).unwrap();
        let s = TwoModeSpin::new(&space).unwrap();
        let comm = s.plus.commutator(&s.minus);
        // exact on blocks with N ≤ 4, i.e. below both cutoffs
        for n in 0..=4usize {
            let sub = photon_block(&space, n).unwrap();
            let c = s.casimir().restrict(&sub).unwrap();
            let j = n as f64 / 2.0;
            for i in 0..sub.dim() {
                assert!((c.matrix()[(i, i)].re - j * (j + 1.0)).abs() < 1e-12);
            }
            let cz = comm.restrict(&sub).unwrap();
            let z2 = s.z.scale_real(2.0).restrict(&sub).unwrap();
            assert!(crate::quantum::max_abs_diff(cz.matrix(), z2.matrix()) < 1e-12);
        }
    }
}
