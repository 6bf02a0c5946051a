//! Standard single-system operators.
//!
//! Qubit convention: basis index 0 is the excited state `|e⟩`, index 1 the
//! ground state `|g⟩`, so `σz = diag(1, -1)` and `σ- = |g⟩⟨e|`.

use super::{c, CMatrix, HilbertSpace, Operator, C64};
use crate::error::{Error, Result};

/// Bosonic lowering operator truncated to `dim` Fock levels.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "annihilation operator needs at least 2 levels, got {dim}"
        )));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    Operator::new(HilbertSpace::single(dim)?, m)
}

/// Number operator `a†a = diag(0, 1, ..., dim-1)`.
pub fn number(dim: usize) -> Result<Operator> {
    let space = HilbertSpace::single(dim)?;
    let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    Operator::diagonal(&space, &diag)
}

fn qubit_op(entries: [[C64; 2]; 2]) -> Operator {
    let m = CMatrix::from_fn(2, 2, |i, j| entries[i][j]);
    Operator::new(HilbertSpace::qubit(), m).expect("2x2 on a qubit")
}

pub fn sigma_x() -> Operator {
    let (o, l) = (c(0.0), c(1.0));
    qubit_op([[o, l], [l, o]])
}

pub fn sigma_y() -> Operator {
    let o = c(0.0);
    qubit_op([[o, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), o]])
}

pub fn sigma_z() -> Operator {
    let o = c(0.0);
    qubit_op([[c(1.0), o], [o, c(-1.0)]])
}

/// `σ+ = |e⟩⟨g|`.
pub fn sigma_plus() -> Operator {
    let o = c(0.0);
    qubit_op([[o, c(1.0)], [o, o]])
}

/// `σ- = |g⟩⟨e|`.
pub fn sigma_minus() -> Operator {
    let o = c(0.0);
    qubit_op([[o, o], [c(1.0), o]])
}

/// Unitary exchanging the two factors of `d ⊗ d`.
pub fn swap_operator(dim: usize) -> Result<Operator> {
    let space = HilbertSpace::new(vec![dim, dim])?;
    let d2 = dim * dim;
    let mut m = CMatrix::zeros(d2, d2);
    for i in 0..dim {
        for j in 0..dim {
            m[(j * dim + i, i * dim + j)] = c(1.0);
        }
    }
    Operator::new(space, m)
}

/// Spin-`j` irrep. Basis index `i` carries `m = j - i`.
#[derive(Debug, Clone)]
pub struct AngularMomentum {
    pub twice_j: usize,
    pub plus: Operator,
    pub minus: Operator,
    pub z: Operator,
}

impl AngularMomentum {
    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn casimir(&self) -> Operator {
        let jz2 = &self.z * &self.z;
        let pm = &self.plus * &self.minus;
        let mp = &self.minus * &self.plus;
        &jz2 + &(&(&pm + &mp) * 0.5)
    }
}

/// Spin operators `J+`, `J-`, `Jz` for `j = twice_j / 2`.
pub fn angular_momentum(twice_j: usize) -> Result<AngularMomentum> {
    let dim = twice_j + 1;
    let space = HilbertSpace::single(dim)?;
    let j = twice_j as f64 / 2.0;
    let mut plus = CMatrix::zeros(dim, dim);
    let mut z = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let m = j - i as f64;
        z[(i, i)] = c(m);
        if i > 0 {
            plus[(i - 1, i)] = c((j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt());
        }
    }
    let plus = Operator::new(space.clone(), plus)?;
    let minus = plus.adjoint();
    Ok(AngularMomentum {
        twice_j,
        plus,
        minus,
        z: Operator::new(space, z)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::max_abs_diff;

    #[test]
    fn lowering_two_levels() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.matrix()[(0, 1)], c(1.0));
        assert_eq!(a.matrix()[(0, 0)], c(0.0));
        assert_eq!(a.matrix()[(1, 0)], c(0.0));
        assert_eq!(a.matrix()[(1, 1)], c(0.0));
        assert!(annihilation(1).is_err());
        assert!(annihilation(0).is_err());
    }

    #[test]
    fn lowering_entry_sqrt_two() {
        let a = annihilation(3).unwrap();
        assert!((a.matrix()[(1, 2)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn number_operator_eigenvalues() {
        let dim = 7;
        let a = annihilation(dim).unwrap();
        let n = &a.adjoint() * &a;
        for k in 0..dim {
            assert!((n.matrix()[(k, k)].re - k as f64).abs() < 1e-12);
        }
        assert!(max_abs_diff(n.matrix(), number(dim).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn ccr_holds_except_last_level() {
        let dim = 6;
        let a = annihilation(dim).unwrap();
        let comm = a.commutator(&a.adjoint());
        for k in 0..dim - 1 {
            assert!((comm.matrix()[(k, k)].re - 1.0).abs() < 1e-12);
        }
        // truncation defect: 1 - dim on the top level
        assert!((comm.matrix()[(dim - 1, dim - 1)].re - (1.0 - dim as f64)).abs() < 1e-12);
    }

    #[test]
    fn spin_half_is_pauli() {
        let s = angular_momentum(1).unwrap();
        assert!(max_abs_diff(s.plus.matrix(), sigma_plus().matrix()) < 1e-15);
        assert!(max_abs_diff(s.minus.matrix(), sigma_minus().matrix()) < 1e-15);
        assert!(max_abs_diff(s.z.matrix(), sigma_z().scale_real(0.5).matrix()) < 1e-15);
    }

    #[test]
    fn spin_one_matrix_element() {
        let s = angular_momentum(2).unwrap();
        // <1,0|J-|1,1>: row m=0 (index 1), column m=1 (index 0)
        assert!((s.minus.matrix()[(1, 0)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn su2_algebra_and_casimir() {
        for twice_j in 0..=20 {
            let s = angular_momentum(twice_j).unwrap();
            let j = s.j();
            let pm = s.plus.commutator(&s.minus);
            assert!(max_abs_diff(pm.matrix(), s.z.scale_real(2.0).matrix()) < 1e-12);
            let zp = s.z.commutator(&s.plus);
            assert!(max_abs_diff(zp.matrix(), s.plus.matrix()) < 1e-12);
            let zm = s.z.commutator(&s.minus);
            assert!(max_abs_diff(zm.matrix(), s.minus.scale_real(-1.0).matrix()) < 1e-12);
            let id = Operator::identity(s.z.space()).scale_real(j * (j + 1.0));
            assert!(max_abs_diff(s.casimir().matrix(), id.matrix()) < 1e-12);
        }
    }

    #[test]
    fn paulis_square_to_identity() {
        let id = Operator::identity(&HilbertSpace::qubit());
        for p in [sigma_x(), sigma_y(), sigma_z()] {
            assert!(max_abs_diff((&p * &p).matrix(), id.matrix()) < 1e-15);
        }
        let xy = sigma_x().commutator(&sigma_y());
        assert!(max_abs_diff(xy.matrix(), sigma_z().scale(C64::new(0.0, 2.0)).matrix()) < 1e-15);
    }

    #[test]
    fn swap_is_involution() {
        let s = swap_operator(3).unwrap();
        let id = Operator::identity(s.space());
        assert!(max_abs_diff((&s * &s).matrix(), id.matrix()) < 1e-15);
        // |0,1> <-> |1,0>
        assert_eq!(s.matrix()[(3, 1)], c(1.0));
    }
}
