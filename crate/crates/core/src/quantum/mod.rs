//! Operator and state algebra on finite, dense Hilbert spaces.

mod operator;
mod space;
mod standard;
mod state;
mod superop;

pub use operator::Operator;
pub use space::{HilbertSpace, Subspace};
pub use standard::{
    angular_momentum, annihilation, number, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z,
    swap_operator, AngularMomentum,
};
pub use state::{thermal_mode, thermal_qubit, thermal_tail_mass, DensityMatrix};
pub(crate) use state::{hermitian_eigen, min_eigenvalue};
pub use superop::{dissipator, innovation};

/// Complex scalar used for all matrices.
pub type C64 = nalgebra::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry of `a - b`.
pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest absolute entry of `m - m†`.
pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replace `m` by `(m + m†)/2` in place.
pub(crate) fn symmetrize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// ∞-norm (maximum absolute row sum).
pub(crate) fn inf_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Coordinate-list view of a matrix used by the integrators; most model
/// operators have O(dim) non-zeros.
#[derive(Debug, Clone)]
pub(crate) struct Sparse {
    entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    pub(crate) fn from_dense(m: &CMatrix) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if z.re != 0.0 || z.im != 0.0 {
                    entries.push((i, j, z));
                }
            }
        }
        Self { entries }
    }

    /// `out += m · A`.
    pub(crate) fn right_mul_acc(&self, m: &CMatrix, out: &mut CMatrix) {
        for &(k, l, b) in &self.entries {
            for r in 0..m.nrows() {
                out[(r, l)] += m[(r, k)] * b;
            }
        }
    }

    /// `out += A · m`.
    pub(crate) fn left_mul_acc(&self, m: &CMatrix, out: &mut CMatrix) {
        let n = m.ncols();
        for &(i, j, a) in &self.entries {
            for col in 0..n {
                out[(i, col)] += a * m[(j, col)];
            }
        }
    }

    /// `out += scale · m · A†`.
    pub(crate) fn right_mul_adj_acc(&self, m: &CMatrix, scale: f64, out: &mut CMatrix) {
        for &(k, l, b) in &self.entries {
            let f = b.conj() * scale;
            for r in 0..m.nrows() {
                out[(r, k)] += m[(r, l)] * f;
            }
        }
    }
}

/// Matrix product that exploits sparsity of either factor.
pub(crate) fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    if n < 16 {
        return a * b;
    }
    let sparse_limit = n * n / 8;
    let count = |m: &CMatrix| m.iter().filter(|z| z.re != 0.0 || z.im != 0.0).count();
    let mut out = CMatrix::zeros(n, b.ncols());
    if count(a) <= sparse_limit {
        Sparse::from_dense(a).left_mul_acc(b, &mut out);
    } else if count(b) <= sparse_limit {
        Sparse::from_dense(b).right_mul_acc(a, &mut out);
    } else {
        return a * b;
    }
    out
}

/// `y += a·x` element-wise.
pub(crate) fn axpy(y: &mut CMatrix, a: f64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}
