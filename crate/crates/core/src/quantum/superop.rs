use super::{CMatrix, DensityMatrix, Operator};
use crate::error::{Error, Result};

fn check(a: &Operator, rho: &DensityMatrix) -> Result<()> {
    if a.space() != rho.space() {
        return Err(Error::SpaceMismatch(format!(
            "operator on {:?}, state on {:?}",
            a.space().dims(),
            rho.space().dims()
        )));
    }
    Ok(())
}

/// Lindblad dissipator `D[A]ρ = AρA† − ½{A†A, ρ}`.
pub fn dissipator(a: &Operator, rho: &DensityMatrix) -> Result<Operator> {
    check(a, rho)?;
    let m = dissipator_matrix(a.matrix(), rho.matrix());
    Operator::new(rho.space().clone(), m)
}

/// Measurement innovation `H[A]ρ = Aρ + ρA† − tr[(A + A†)ρ] ρ`.
pub fn innovation(a: &Operator, rho: &DensityMatrix) -> Result<Operator> {
    check(a, rho)?;
    let m = innovation_matrix(a.matrix(), rho.matrix());
    Operator::new(rho.space().clone(), m)
}

pub(crate) fn dissipator_matrix(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let ad = a.adjoint();
    let ada = &ad * a;
    let jump = a * rho * &ad;
    let anti = &ada * rho + rho * &ada;
    jump - anti * super::c(0.5)
}

pub(crate) fn innovation_matrix(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let a_rho = a * rho;
    let rho_ad = rho * a.adjoint();
    let mean = a_rho.trace() + rho_ad.trace();
    a_rho + rho_ad - rho * mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        annihilation, c, max_abs_diff, sigma_minus, sigma_z, swap_operator, thermal_qubit,
        HilbertSpace, C64,
    };
    use proptest::prelude::*;

    #[test]
    fn decay_of_excited_state() {
        let q = HilbertSpace::qubit();
        let e = DensityMatrix::basis_state(&q, 0).unwrap();
        let d = dissipator(&sigma_minus(), &e).unwrap();
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), c(1.0)]));
        assert!(max_abs_diff(d.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn unitary_jump_reduces_to_conjugation() {
        let s = swap_operator(2).unwrap();
        let rho = thermal_qubit(0.4).unwrap().kron(&thermal_qubit(1.3).unwrap()).unwrap();
        let d = dissipator(&s, &rho).unwrap();
        let expected = s.matrix() * rho.matrix() * s.matrix() - rho.matrix();
        assert!(max_abs_diff(d.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn dephasing_leaves_diagonal_states() {
        let rho = thermal_qubit(0.8).unwrap();
        let d = dissipator(&sigma_z(), &rho).unwrap();
        assert!(d.matrix().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn innovation_examples() {
        let q = HilbertSpace::qubit();
        let e = DensityMatrix::basis_state(&q, 0).unwrap();
        assert!(innovation(&sigma_z(), &e).unwrap().matrix().iter().all(|z| z.norm() < 1e-15));
        // direct expansion: Aρ + ρA = 2 diag(p, -(1-p)), tr[2Aρ] = 2(2p-1)
        for p in [0.1, 0.25, 0.5, 0.9] {
            let rho = DensityMatrix::diagonal(&q, &[p, 1.0 - p]).unwrap();
            let h = innovation(&sigma_z(), &rho).unwrap();
            let v = 4.0 * p * (1.0 - p);
            assert!((h.matrix()[(0, 0)].re - v).abs() < 1e-15);
            assert!((h.matrix()[(1, 1)].re + v).abs() < 1e-15);
        }
    }

    #[test]
    fn space_mismatch_is_reported() {
        let rho = thermal_qubit(0.1).unwrap();
        let a = annihilation(3).unwrap();
        assert!(matches!(dissipator(&a, &rho), Err(Error::SpaceMismatch(_))));
        assert!(matches!(innovation(&a, &rho), Err(Error::SpaceMismatch(_))));
    }

    fn random_state(dim: usize, seed: &[f64]) -> DensityMatrix {
        let g = CMatrix::from_fn(dim, dim, |i, j| {
            C64::new(seed[(i * dim + j) % seed.len()], seed[(i + 3 * j + 1) % seed.len()])
        });
        let m = &g * g.adjoint() + CMatrix::identity(dim, dim) * c(1e-3);
        let tr = m.trace();
        DensityMatrix::new(HilbertSpace::single(dim).unwrap(), m / tr).unwrap()
    }

    proptest! {
        #[test]
        fn outputs_are_traceless(
            dim in 2usize..6,
            rs in prop::collection::vec(-1.0f64..1.0, 16..40),
            ar in prop::collection::vec(-2.0f64..2.0, 36),
            ai in prop::collection::vec(-2.0f64..2.0, 36),
        ) {
            let rho = random_state(dim, &rs);
            let a = Operator::new(
                rho.space().clone(),
                CMatrix::from_fn(dim, dim, |i, j| C64::new(ar[i * 6 + j], ai[i * 6 + j])),
            ).unwrap();
            let d = dissipator(&a, &rho).unwrap();
            prop_assert!(d.trace().norm() < 1e-12);
            let h = innovation(&a, &rho).unwrap();
            prop_assert!(h.trace().norm() < 1e-12);
            let herm = &a + &a.adjoint();
            let hh = innovation(&herm, &rho).unwrap();
            prop_assert!(hh.trace().norm() < 1e-12);
        }
    }
}
