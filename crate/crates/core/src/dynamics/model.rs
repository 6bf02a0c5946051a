use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{c, matmul, CMatrix, DensityMatrix, HilbertSpace, Operator, Sparse, Subspace, C64};
use crate::tolerances::HERMITIAN_TOL;

/// One Lindblad term `rate · D[op]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub label: String,
    pub rate: f64,
    pub op: Operator,
}

/// Time-independent Lindblad generator `-i[H, ρ] + Σ_k r_k D[A_k]ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    space: HilbertSpace,
    hamiltonian: Operator,
    dissipators: Vec<Dissipator>,
}

/// Summary of a model used for step-size validation and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub dims: Vec<usize>,
    pub hamiltonian_norm: f64,
    pub dissipators: Vec<(String, f64)>,
}

impl LindbladModel {
    /// Model with `H = 0` and no dissipators.
    pub fn new(space: HilbertSpace) -> Self {
        Self {
            hamiltonian: Operator::zeros(&space),
            space,
            dissipators: Vec::new(),
        }
    }

    pub fn with_hamiltonian(mut self, h: Operator) -> Result<Self> {
        self.set_hamiltonian(h)?;
        Ok(self)
    }

    pub fn with_dissipator(mut self, label: &str, rate: f64, op: Operator) -> Result<Self> {
        self.add_dissipator(label, rate, op)?;
        Ok(self)
    }

    pub fn set_hamiltonian(&mut self, h: Operator) -> Result<()> {
        if *h.space() != self.space {
            return Err(Error::SpaceMismatch("Hamiltonian".into()));
        }
        let defect = h.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NonHermitian(format!("Hamiltonian defect {defect:e}")));
        }
        self.hamiltonian = h;
        Ok(())
    }

    pub fn add_dissipator(&mut self, label: &str, rate: f64, op: Operator) -> Result<()> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate {rate} for '{label}'")));
        }
        if *op.space() != self.space {
            return Err(Error::SpaceMismatch(format!("jump operator '{label}'")));
        }
        self.dissipators.push(Dissipator {
            label: label.to_string(),
            rate,
            op,
        });
        Ok(())
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[Dissipator] {
        &self.dissipators
    }

    pub fn dissipator(&self, label: &str) -> Option<&Dissipator> {
        self.dissipators.iter().find(|d| d.label == label)
    }

    /// Largest of the dissipator rates and `‖H‖∞`; the step rules are stated
    /// in terms of this number.
    pub fn max_rate(&self) -> f64 {
        self.dissipators
            .iter()
            .map(|d| d.rate)
            .fold(self.hamiltonian.inf_norm(), f64::max)
    }

    /// `‖H‖∞ + Σ r ‖A†A‖∞`, a bound on the generator norm that sets the
    /// explicit-integrator stability limit.
    pub fn stiffness(&self) -> f64 {
        self.dissipators
            .iter()
            .map(|d| d.rate * (&d.op.adjoint() * &d.op).inf_norm())
            .sum::<f64>()
            + self.hamiltonian.inf_norm()
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            dims: self.space.dims().to_vec(),
            hamiltonian_norm: self.hamiltonian.inf_norm(),
            dissipators: self
                .dissipators
                .iter()
                .map(|d| (d.label.clone(), d.rate))
                .collect(),
        }
    }

    /// `L(ρ)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Operator> {
        if *rho.space() != self.space {
            return Err(Error::SpaceMismatch("model and state".into()));
        }
        let mut out = CMatrix::zeros(rho.dim(), rho.dim());
        Generator::new(self).apply(rho.matrix(), &mut out);
        Operator::new(self.space.clone(), out)
    }

    /// True when `H` is diagonal, every jump operator maps basis states to
    /// basis states and `rho0` is diagonal; the dynamics is then a classical
    /// Markov chain on the basis.
    pub fn is_classical_diagonal(&self, rho0: &DensityMatrix) -> bool {
        self.hamiltonian.is_diagonal(0.0)
            && self.dissipators.iter().all(|d| d.op.is_monomial())
            && rho0.is_diagonal(0.0)
    }

    /// The same model compressed onto an invariant subspace.
    ///
    /// Fails if `H`, any jump operator or any `A†A` maps `sub` outside itself.
    pub fn restrict(&self, sub: &Subspace) -> Result<Self> {
        if *sub.parent() != self.space {
            return Err(Error::SpaceMismatch("subspace parent differs from model space".into()));
        }
        let tol = 1e-12;
        let leak = self.hamiltonian.leakage(sub);
        if leak > tol {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian leaks out of the subspace ({leak:e})"
            )));
        }
        let mut out = LindbladModel::new(sub.space().clone());
        out.hamiltonian = self.hamiltonian.restrict(sub)?;
        for d in &self.dissipators {
            let ada = &d.op.adjoint() * &d.op;
            let leak = d.op.leakage(sub).max(ada.leakage(sub));
            if leak > tol {
                return Err(Error::InvalidParameter(format!(
                    "jump operator '{}' leaks out of the subspace ({leak:e})",
                    d.label
                )));
            }
            out.add_dissipator(&d.label, d.rate, d.op.restrict(sub)?)?;
        }
        Ok(out)
    }
}

/// Precomputed generator: `L(ρ) = Kρ + ρK† + Σ r AρA†` with
/// `K = -iH - ½ Σ r A†A`.
#[derive(Debug, Clone)]
pub(crate) struct Generator {
    k: Sparse,
    jumps: Vec<(f64, Sparse)>,
    dim: usize,
}

impl Generator {
    pub(crate) fn new(model: &LindbladModel) -> Self {
        let d = model.space.dim();
        let mut k = model.hamiltonian.matrix() * C64::new(0.0, -1.0);
        let mut jumps = Vec::new();
        for diss in &model.dissipators {
            if diss.rate == 0.0 {
                continue;
            }
            let a = diss.op.matrix();
            k -= matmul(&a.adjoint(), a) * c(0.5 * diss.rate);
            jumps.push((diss.rate, Sparse::from_dense(a)));
        }
        Self {
            k: Sparse::from_dense(&k),
            jumps,
            dim: d,
        }
    }

    /// Non-Hermitian part only: `ρ ↦ Kρ + ρK†`.
    pub(crate) fn no_jump(model: &LindbladModel) -> Self {
        let mut g = Self::new(model);
        g.jumps.clear();
        g
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    /// Overwrites `out` with `L(rho)`; `scratch` is a same-sized work matrix.
    pub(crate) fn apply_with(&self, rho: &CMatrix, out: &mut CMatrix, scratch: &mut CMatrix) {
        scratch.fill(C64::new(0.0, 0.0));
        self.k.left_mul_acc(rho, scratch);
        out.copy_from(&*scratch);
        *out += scratch.adjoint();
        for (rate, a) in &self.jumps {
            scratch.fill(C64::new(0.0, 0.0));
            a.left_mul_acc(rho, scratch);
            a.right_mul_adj_acc(scratch, *rate, out);
        }
    }

    pub(crate) fn apply(&self, rho: &CMatrix, out: &mut CMatrix) {
        let mut scratch = CMatrix::zeros(self.dim, self.dim);
        self.apply_with(rho, out, &mut scratch);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{annihilation, dissipator, max_abs_diff, sigma_minus, sigma_plus, sigma_x, thermal_qubit};

    #[test]
    fn generator_matches_superoperators() {
        let q = HilbertSpace::qubit();
        let model = LindbladModel::new(q.clone())
            .with_hamiltonian(sigma_x().scale_real(0.7))
            .unwrap()
            .with_dissipator("down", 1.3, sigma_minus())
            .unwrap()
            .with_dissipator("up", 0.4, sigma_plus())
            .unwrap();
        let rho = DensityMatrix::pure(&q, &[c(0.6), C64::new(0.0, 0.8)]).unwrap();
        let l = model.apply(&rho).unwrap();
        let h = sigma_x().scale_real(0.7);
        let comm = (h.matrix() * rho.matrix() - rho.matrix() * h.matrix()) * C64::new(0.0, -1.0);
        let expected = comm
            + dissipator(&sigma_minus(), &rho).unwrap().matrix() * c(1.3)
            + dissipator(&sigma_plus(), &rho).unwrap().matrix() * c(0.4);
        assert!(max_abs_diff(l.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn rejects_bad_terms() {
        let q = HilbertSpace::qubit();
        let mut m = LindbladModel::new(q);
        assert!(m.add_dissipator("neg", -1.0, sigma_minus()).is_err());
        assert!(m.add_dissipator("wrong", 1.0, annihilation(3).unwrap()).is_err());
        assert!(m.set_hamiltonian(sigma_minus()).is_err());
        assert!(m.apply(&thermal_qubit(1.0).unwrap()).is_ok());
    }

    #[test]
    fn restriction_requires_invariance() {
        let space = HilbertSpace::new(vec![3, 3]).unwrap();
        let a1 = annihilation(3).unwrap().embed(&space, 0).unwrap();
        let a2 = annihilation(3).unwrap().embed(&space, 1).unwrap();
        let hop = &a1 * &a2.adjoint();
        let model = LindbladModel::new(space.clone())
            .with_dissipator("hop", 1.0, hop)
            .unwrap();
        let sub = Subspace::from_predicate(space.clone(), |l| l[0] + l[1] == 2).unwrap();
        let r = model.restrict(&sub).unwrap();
        assert_eq!(r.space().dim(), 3);
        let lossy = LindbladModel::new(space.clone())
            .with_dissipator("loss", 1.0, a1)
            .unwrap();
        assert!(lossy.restrict(&sub).is_err());
    }
}
