use std::ops::{Add, Mul, Neg, Sub};

use super::{c, hermiticity_defect, inf_norm, CMatrix, DensityMatrix, HilbertSpace, Subspace, C64};
use crate::error::{Error, Result};

/// Dense square operator on a [`HilbertSpace`].
///
/// Arithmetic operators (`+`, `-`, `*`) panic when the operands live on
/// different spaces; the fallible constructors and the superoperator
/// functions report mismatches as [`Error::SpaceMismatch`].
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidDimension(format!(
                "matrix is {}x{}, space dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: CMatrix::zeros(d, d),
        }
    }

    /// Diagonal operator with real entries.
    pub fn diagonal(space: &HilbertSpace, entries: &[f64]) -> Result<Self> {
        if entries.len() != space.dim() {
            return Err(Error::InvalidDimension(format!(
                "{} diagonal entries for dimension {}",
                entries.len(),
                space.dim()
            )));
        }
        let mut m = CMatrix::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = c(e);
        }
        Ok(Self {
            space: space.clone(),
            matrix: m,
        })
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

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entry of `A - A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    /// True when every column has at most one non-zero entry, i.e. the
    /// operator maps basis states to (multiples of) basis states.
    pub fn is_monomial(&self) -> bool {
        self.matrix
            .column_iter()
            .all(|col| col.iter().filter(|z| z.norm() > 0.0).count() <= 1)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.matrix)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c(factor))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Self {
        &(self * other) - &(other * self)
    }

    /// Kronecker product `self ⊗ other` on the composite space.
    pub fn kron(&self, other: &Operator) -> Result<Self> {
        Ok(Self {
            space: self.space.tensor(&other.space)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Lift a single-subsystem operator to act on subsystem `slot` of `target`.
    pub fn embed(&self, target: &HilbertSpace, slot: usize) -> Result<Self> {
        let dims = target.dims();
        if slot >= dims.len() {
            return Err(Error::InvalidDimension(format!(
                "subsystem {slot} does not exist in {dims:?}"
            )));
        }
        if self.dim() != dims[slot] {
            return Err(Error::SpaceMismatch(format!(
                "operator of dimension {} placed on subsystem of dimension {}",
                self.dim(),
                dims[slot]
            )));
        }
        let left: usize = dims[..slot].iter().product();
        let right: usize = dims[slot + 1..].iter().product();
        let matrix = CMatrix::identity(left, left)
            .kronecker(&self.matrix)
            .kronecker(&CMatrix::identity(right, right));
        Ok(Self {
            space: target.clone(),
            matrix,
        })
    }

    /// Expectation value `tr(A ρ)`.
    pub fn expect(&self, rho: &DensityMatrix) -> Result<C64> {
        if self.space != *rho.space() {
            return Err(Error::SpaceMismatch("operator and state".into()));
        }
        Ok(trace_of_product(&self.matrix, rho.matrix()))
    }

    /// Largest entry that maps a vector of `sub` outside of it.
    pub fn leakage(&self, sub: &Subspace) -> f64 {
        let mut inside = vec![false; self.dim()];
        for &b in sub.basis() {
            inside[b] = true;
        }
        let mut worst = 0.0f64;
        for &j in sub.basis() {
            for (i, inside_i) in inside.iter().enumerate() {
                if !inside_i {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Compression `P A P` onto `sub`, expressed on the subspace.
    pub fn restrict(&self, sub: &Subspace) -> Result<Self> {
        if self.space != *sub.parent() {
            return Err(Error::SpaceMismatch("operator and subspace parent".into()));
        }
        let b = sub.basis();
        let matrix = CMatrix::from_fn(b.len(), b.len(), |i, j| self.matrix[(b[i], b[j])]);
        Ok(Self {
            space: sub.space().clone(),
            matrix,
        })
    }

    fn assert_same_space(&self, other: &Operator, what: &str) {
        assert!(
            self.space == other.space,
            "{what} of operators on different spaces: {:?} vs {:?}",
            self.space.dims(),
            other.space.dims()
        );
    }
}

/// `tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.assert_same_space(rhs, "product");
        Operator {
            space: self.space.clone(),
            matrix: super::matmul(&self.matrix, &rhs.matrix),
        }
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        self.assert_same_space(rhs, "sum");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        self.assert_same_space(rhs, "difference");
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;

    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: f64) -> Operator {
        self.scale_real(rhs)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;

    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{annihilation, sigma_z};

    #[test]
    fn embed_matches_kron_with_identity() {
        let a = annihilation(3).unwrap();
        let space = HilbertSpace::new(vec![2, 3, 2]).unwrap();
        let e = a.embed(&space, 1).unwrap();
        let id2 = Operator::identity(&HilbertSpace::qubit());
        let k = id2.kron(&a).unwrap().kron(&id2).unwrap();
        assert_eq!(e.matrix(), k.matrix());
        assert!(a.embed(&space, 0).is_err());
        assert!(a.embed(&space, 3).is_err());
    }

    #[test]
    fn monomial_and_diagonal_detection() {
        let a = annihilation(4).unwrap();
        assert!(a.is_monomial());
        assert!(!a.is_diagonal(0.0));
        assert!(sigma_z().is_diagonal(0.0));
        let x = &a + &a.adjoint();
        assert!(!x.is_monomial());
    }

    #[test]
    #[should_panic]
    fn product_across_spaces_panics() {
        let _ = &annihilation(2).unwrap() * &annihilation(3).unwrap();
    }
}
