//! Sparse and dense matrix plumbing: CSR storage, banded Cholesky,
//! dense eigensolvers and Matrix Market IO.

mod cholesky;
mod dense;
mod eig;
pub mod mtx;
mod sparse;

pub use cholesky::SpdFactorization;
pub use dense::DenseMatrix;
pub use eig::{dense_eigenvalues, dense_sym_eig, dense_sym_eig_capped, spectral_radius_dense, ORACLE_CAP};
pub use sparse::SparseMatrix;

/// Relative tolerance used for every symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
