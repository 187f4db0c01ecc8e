use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Default dimension cap for dense eigen-oracles.
pub const ORACLE_CAP: usize = 5000;

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn dense_sym_eig(m: &DenseMatrix) -> Result<Vec<f64>> {
    dense_sym_eig_capped(m, ORACLE_CAP)
}

pub fn dense_sym_eig_capped(m: &DenseMatrix, cap: usize) -> Result<Vec<f64>> {
    if m.nrows() > cap {
        return Err(Error::OracleCapExceeded { dim: m.nrows(), cap });
    }
    m.check_symmetric()?;
    let mut sym = m.to_nalgebra();
    // symmetrize exactly so the solver only sees the lower triangle it reads
    for i in 0..sym.nrows() {
        for j in 0..i {
            let v = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = v;
            sym[(j, i)] = v;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of a general square matrix as `(re, im)` pairs, unordered.
pub fn dense_eigenvalues(m: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { dim: m.nrows(), cap: ORACLE_CAP });
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let fm = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let ev = fm.eigenvalues().map_err(|e| Error::NoConvergence {
        iterations: 0,
        what: format!("real Schur decomposition ({e:?})"),
    })?;
    Ok(ev.iter().map(|z| (z.re, z.im)).collect())
}

/// Largest eigenvalue modulus of a general square matrix.
pub fn spectral_radius_dense(m: &DenseMatrix) -> Result<f64> {
    Ok(dense_eigenvalues(m)?.into_iter().fold(0.0, |r, (re, im)| r.max(re.hypot(im))))
}
