use nalgebra::{DVector, SymmetricEigen};

use super::operator::trace_of_product;
use super::{c, hermiticity_defect, CMatrix, HilbertSpace, Operator, Subspace, C64};
use crate::error::{Error, Result};
use crate::tolerances::{HERMITIAN_TOL, MIN_EIGENVALUE, TAIL_MASS_LIMIT, TRACE_TOL};

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let op = Operator::new(space, matrix)?;
        let rho = Self::from_parts(op.space().clone(), op.into_matrix());
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_parts(space: HilbertSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(space.dim(), matrix.nrows());
        Self { space, matrix }
    }

    /// Pure state `|ψ⟩⟨ψ|`, normalising `amplitudes`.
    pub fn pure(space: &HilbertSpace, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::InvalidDimension(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                space.dim()
            )));
        }
        let psi = DVector::from_column_slice(amplitudes);
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let psi = psi / c(norm);
        Ok(Self::from_parts(space.clone(), &psi * psi.adjoint()))
    }

    pub fn basis_state(space: &HilbertSpace, index: usize) -> Result<Self> {
        let mut probs = vec![0.0; space.dim()];
        *probs.get_mut(index).ok_or_else(|| {
            Error::InvalidState(format!("basis index {index} out of range {}", space.dim()))
        })? = 1.0;
        Self::diagonal(space, &probs)
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(space: &HilbertSpace, probs: &[f64]) -> Result<Self> {
        let op = Operator::diagonal(space, probs)?;
        Self::new(space.clone(), op.into_matrix())
    }

    pub fn maximally_mixed(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::identity(d, d) / c(d as f64))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn as_operator(&self) -> Operator {
        Operator::new(self.space.clone(), self.matrix.clone()).expect("shape checked on construction")
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Check the Hermiticity, trace and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let defect = hermiticity_defect(&self.matrix);
        if !(defect <= HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = self.matrix.trace();
        if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if !(min >= MIN_EIGENVALUE) {
            return Err(Error::InvalidState(format!("minimum eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = hermitian_eigen(&self.matrix).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        is_diagonal(&self.matrix, tol)
    }

    /// Populations `⟨i|ρ|i⟩`.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `tr(A ρ)`.
    pub fn expect_complex(&self, op: &Operator) -> Result<C64> {
        if self.space != *op.space() {
            return Err(Error::SpaceMismatch("state and operator".into()));
        }
        Ok(trace_of_product(op.matrix(), &self.matrix))
    }

    /// Real part of `tr(A ρ)`; exact for Hermitian `A`.
    pub fn expect(&self, op: &Operator) -> Result<f64> {
        self.expect_complex(op).map(|z| z.re)
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<Self> {
        Ok(Self::from_parts(
            self.space.tensor(&other.space)?,
            self.matrix.kronecker(&other.matrix),
        ))
    }

    /// Reduced state on the subsystems listed in `keep` (in ascending order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let dims = self.space.dims();
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDimension(format!(
                "kept subsystems {keep:?} must be non-empty and strictly ascending"
            )));
        }
        if keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::InvalidDimension(format!(
                "kept subsystems {keep:?} out of range for {dims:?}"
            )));
        }
        let kept_space = HilbertSpace::new(keep.iter().map(|&k| dims[k]).collect())?;
        let traced: Vec<usize> = (0..dims.len()).filter(|s| !keep.contains(s)).collect();
        let n = self.dim();
        let split = |idx: usize| {
            let levels = self.space.unflatten(idx);
            let k: Vec<usize> = keep.iter().map(|&s| levels[s]).collect();
            let t: Vec<usize> = traced.iter().map(|&s| levels[s]).collect();
            (kept_space.flatten(&k), t)
        };
        let parts: Vec<(usize, Vec<usize>)> = (0..n).map(split).collect();
        let mut out = CMatrix::zeros(kept_space.dim(), kept_space.dim());
        for i in 0..n {
            for j in 0..n {
                if parts[i].1 == parts[j].1 {
                    out[(parts[i].0, parts[j].0)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Self::from_parts(kept_space, out))
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch("trace distance between different spaces".into()));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigen(&diff).eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch("fidelity between different spaces".into()));
        }
        let root = psd_sqrt(&self.matrix);
        let inner = &root * &other.matrix * &root;
        let s: f64 = hermitian_eigen(&inner)
            .eigenvalues
            .iter()
            .map(|l| l.max(0.0).sqrt())
            .sum();
        Ok(s * s)
    }

    /// State expressed on `sub`; fails if weight outside `sub` exceeds the trace tolerance.
    pub fn restrict(&self, sub: &Subspace) -> Result<Self> {
        if self.space != *sub.parent() {
            return Err(Error::SpaceMismatch("state and subspace parent".into()));
        }
        let b = sub.basis();
        let m = CMatrix::from_fn(b.len(), b.len(), |i, j| self.matrix[(b[i], b[j])]);
        let inside = m.trace().re;
        if (inside - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "state has weight {:e} outside the subspace",
                1.0 - inside
            )));
        }
        Ok(Self::from_parts(sub.space().clone(), m))
    }

    /// Embed a state living on `sub` back into the parent space.
    pub fn lift(&self, sub: &Subspace) -> Result<Self> {
        if self.space != *sub.space() {
            return Err(Error::SpaceMismatch("state does not live on the subspace".into()));
        }
        let d = sub.parent().dim();
        let b = sub.basis();
        let mut m = CMatrix::zeros(d, d);
        for (i, &bi) in b.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                m[(bi, bj)] = self.matrix[(i, j)];
            }
        }
        Ok(Self::from_parts(sub.parent().clone(), m))
    }
}

fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)].norm() <= tol))
}

/// Smallest eigenvalue of a Hermitian matrix, with a shortcut for diagonal input.
pub(crate) fn min_eigenvalue(m: &CMatrix) -> f64 {
    if is_diagonal(m, 0.0) {
        return (0..m.nrows()).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    }
    hermitian_eigen(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    SymmetricEigen::new(m.clone())
}

/// Square root of a positive semidefinite Hermitian matrix (negative eigenvalues clipped).
fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitian_eigen(m);
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let s = c(l.max(0.0).sqrt());
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= s;
        }
    }
    &scaled * u.adjoint()
}

/// Thermal two-level state `diag(p_e, p_g)` with `p_e = (1 + tanh(-βε/2))/2`.
pub fn thermal_qubit(beta_eps: f64) -> Result<DensityMatrix> {
    if beta_eps.is_nan() {
        return Err(Error::InvalidParameter("βε is NaN".into()));
    }
    let pe = 0.5 * (1.0 + (-beta_eps / 2.0).tanh());
    DensityMatrix::diagonal(&HilbertSpace::qubit(), &[pe, 1.0 - pe])
}

/// Probability mass of a geometric thermal law with mean `nbar` on levels `n ≥ cutoff`.
pub fn thermal_tail_mass(nbar: f64, cutoff: usize) -> f64 {
    if nbar <= 0.0 {
        return if cutoff == 0 { 1.0 } else { 0.0 };
    }
    let lambda = nbar / (nbar + 1.0);
    lambda.powi(cutoff as i32)
}

/// Truncated thermal state on `cutoff` Fock levels `0..cutoff`.
pub fn thermal_mode(nbar: f64, cutoff: usize) -> Result<DensityMatrix> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("mean occupation {nbar}")));
    }
    if cutoff == 0 {
        return Err(Error::InvalidDimension("cutoff of zero levels".into()));
    }
    let tail = thermal_tail_mass(nbar, cutoff);
    if tail >= TAIL_MASS_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail,
            limit: TAIL_MASS_LIMIT,
        });
    }
    let lambda = nbar / (nbar + 1.0);
    let weights: Vec<f64> = (0..cutoff).map(|n| lambda.powi(n as i32)).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    DensityMatrix::diagonal(&HilbertSpace::single(cutoff)?, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{max_abs_diff, number, sigma_x};

    #[test]
    fn thermal_qubit_limits() {
        let r = thermal_qubit(0.0).unwrap();
        assert_eq!(r.populations(), vec![0.5, 0.5]);
        let r = thermal_qubit(f64::INFINITY).unwrap();
        assert_eq!(r.populations(), vec![0.0, 1.0]);
        let r = thermal_qubit(2.0 * 0.5f64.atanh()).unwrap();
        assert!((r.populations()[0] - 0.25).abs() < 1e-15);
        assert!(thermal_qubit(f64::NAN).is_err());
    }

    #[test]
    fn thermal_mode_examples() {
        let vac = thermal_mode(0.0, 3).unwrap();
        assert_eq!(vac.populations(), vec![1.0, 0.0, 0.0]);
        let r = thermal_mode(1.0, 40).unwrap();
        let mean = r.expect(&number(40).unwrap()).unwrap();
        assert!((mean - 1.0).abs() < 1e-6);
        for (n, p) in r.populations().iter().enumerate() {
            assert!((p - 0.5f64.powi(n as i32 + 1)).abs() < 1e-11);
        }
        assert!(matches!(
            thermal_mode(1.0, 10),
            Err(Error::CutoffTooSmall { cutoff: 10, .. })
        ));
    }

    #[test]
    fn validation_rejects_bad_states() {
        let q = HilbertSpace::qubit();
        assert!(DensityMatrix::diagonal(&q, &[0.6, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&q, &[1.1, -0.1]).is_err());
        let mut m = CMatrix::identity(2, 2) * c(0.5);
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(q.clone(), m).is_err());
        assert!(DensityMatrix::new(q, CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = thermal_mode(0.5, 25).unwrap();
        let b = thermal_qubit(0.7).unwrap();
        let x = DensityMatrix::pure(&HilbertSpace::qubit(), &[c(1.0), C64::new(0.0, 1.0)]).unwrap();
        let ab = a.kron(&b).unwrap().kron(&x).unwrap();
        let ra = ab.partial_trace(&[0]).unwrap();
        let rb = ab.partial_trace(&[1]).unwrap();
        let rax = ab.partial_trace(&[0, 2]).unwrap();
        assert!(max_abs_diff(ra.matrix(), a.matrix()) < 1e-14);
        assert!(max_abs_diff(rb.matrix(), b.matrix()) < 1e-14);
        assert!(max_abs_diff(rax.matrix(), a.kron(&x).unwrap().matrix()) < 1e-14);
        assert!(ab.partial_trace(&[1, 0]).is_err());
    }

    #[test]
    fn distances_between_qubit_states() {
        let q = HilbertSpace::qubit();
        let e = DensityMatrix::basis_state(&q, 0).unwrap();
        let g = DensityMatrix::basis_state(&q, 1).unwrap();
        assert!((e.trace_distance(&g).unwrap() - 1.0).abs() < 1e-14);
        assert!(e.fidelity(&g).unwrap().abs() < 1e-14);
        let plus = DensityMatrix::pure(&q, &[c(1.0), c(1.0)]).unwrap();
        assert!((e.fidelity(&plus).unwrap() - 0.5).abs() < 1e-12);
        assert!((plus.expect(&sigma_x()).unwrap() - 1.0).abs() < 1e-14);
        let t1 = thermal_qubit(0.3).unwrap();
        let t2 = thermal_qubit(0.9).unwrap();
        let (p, q2) = (t1.populations(), t2.populations());
        let classical: f64 = p.iter().zip(&q2).map(|(a, b)| (a * b).sqrt()).sum();
        assert!((t1.fidelity(&t2).unwrap() - classical * classical).abs() < 1e-12);
    }

    #[test]
    fn restrict_and_lift_round_trip() {
        let space = HilbertSpace::new(vec![2, 2]).unwrap();
        let sub = Subspace::from_predicate(space.clone(), |l| l[0] + l[1] == 1).unwrap();
        let rho = DensityMatrix::pure(&space, &[c(0.0), c(0.6), c(0.8), c(0.0)]).unwrap();
        let r = rho.restrict(&sub).unwrap();
        assert_eq!(r.dim(), 2);
        assert!(max_abs_diff(r.lift(&sub).unwrap().matrix(), rho.matrix()) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(&space);
        assert!(mixed.restrict(&sub).is_err());
    }
}
