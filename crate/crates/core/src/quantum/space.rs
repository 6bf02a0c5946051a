use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::MAX_TOTAL_DIM;

/// Tensor-product Hilbert space described by its ordered subsystem dimensions.
///
/// Basis states are ordered lexicographically with the first subsystem
/// varying slowest, matching the Kronecker product `A ⊗ B ⊗ ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, MAX_TOTAL_DIM)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension("no subsystems given".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidDimension(format!("subsystem dimension {d}")));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&t| t <= cap)
            .ok_or_else(|| {
                Error::InvalidDimension(format!("total dimension of {dims:?} exceeds cap {cap}"))
            })?;
        debug_assert!(total >= 1);
        Ok(Self { dims })
    }

    /// Single system of dimension `dim`.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn qubit() -> Self {
        Self { dims: vec![2] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Composite space `self ⊗ other`.
    pub fn tensor(&self, other: &HilbertSpace) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    /// Occupation indices of each subsystem for the flat basis index `index`.
    pub fn unflatten(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Flat basis index for per-subsystem occupations.
    pub fn flatten(&self, levels: &[usize]) -> usize {
        debug_assert_eq!(levels.len(), self.dims.len());
        levels
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&l, &d)| acc * d + l)
    }
}

/// Span of a subset of computational basis vectors of a parent space.
///
/// Used to evolve a model on an invariant sector (for example a fixed
/// total photon number) without carrying the full dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    parent: HilbertSpace,
    basis: Vec<usize>,
    space: HilbertSpace,
}

impl Subspace {
    pub fn new(parent: HilbertSpace, basis: Vec<usize>) -> Result<Self> {
        let dim = parent.dim();
        if basis.is_empty() {
            return Err(Error::InvalidDimension("empty subspace".into()));
        }
        let mut seen = vec![false; dim];
        for &b in &basis {
            if b >= dim || seen[b] {
                return Err(Error::InvalidDimension(format!(
                    "basis index {b} is out of range or repeated"
                )));
            }
            seen[b] = true;
        }
        let space = HilbertSpace::single(basis.len())?;
        Ok(Self {
            parent,
            basis,
            space,
        })
    }

    /// All basis states of `parent` whose subsystem occupations satisfy `keep`.
    pub fn from_predicate(parent: HilbertSpace, keep: impl Fn(&[usize]) -> bool) -> Result<Self> {
        let basis = (0..parent.dim())
            .filter(|&i| keep(&parent.unflatten(i)))
            .collect();
        Self::new(parent, basis)
    }

    pub fn parent(&self) -> &HilbertSpace {
        &self.parent
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}
