use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};

/// Banded `L Lᵀ` factorization of a symmetric positive definite matrix.
///
/// Row `i` of `L` is stored over columns `i - w ..= i`, where `w` is the
/// half-bandwidth of the input. Dense input is scanned for its actual
/// bandwidth, so a dense tridiagonal matrix factors in `O(n)`.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    n: usize,
    w: usize,
    band: Vec<f64>,
}

impl SpdFactorization {
    pub fn from_sparse(m: &SparseMatrix) -> Result<Self> {
        m.check_symmetric()?;
        let n = m.nrows();
        let w = m.bandwidth();
        let mut band = vec![0.0; n * (w + 1)];
        for (i, j, v) in m.triplets() {
            if j <= i {
                band[i * (w + 1) + j + w - i] = v;
            }
        }
        Self::factor(n, w, band)
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        m.check_symmetric()?;
        let n = m.nrows();
        let w = m.bandwidth();
        let mut band = vec![0.0; n * (w + 1)];
        for i in 0..n {
            for j in i.saturating_sub(w)..=i {
                band[i * (w + 1) + j + w - i] = m[(i, j)];
            }
        }
        Self::factor(n, w, band)
    }

    fn factor(n: usize, w: usize, mut band: Vec<f64>) -> Result<Self> {
        let stride = w + 1;
        for i in 0..n {
            let lo_i = i.saturating_sub(w);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(w));
                let ri = i * stride + w - i;
                let rj = j * stride + w - j;
                let mut s = band[ri + j];
                for k in lo..j {
                    s -= band[ri + k] * band[rj + k];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotSpd { row: i, pivot: s });
                    }
                    band[ri + i] = s.sqrt();
                } else {
                    band[ri + j] = s / band[rj + j];
                }
            }
        }
        Ok(Self { n, w, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.w
    }

    /// Solves `M z = rhs`. Panics on dimension mismatch.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut z = rhs.to_vec();
        self.solve_in_place(&mut z);
        z
    }

    pub fn solve_checked(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: rhs.len() });
        }
        Ok(self.solve(rhs))
    }

    pub fn solve_in_place(&self, z: &mut [f64]) {
        assert_eq!(z.len(), self.n);
        let (w, stride) = (self.w, self.w + 1);
        for i in 0..self.n {
            let ri = i * stride + w - i;
            let mut s = z[i];
            for k in i.saturating_sub(w)..i {
                s -= self.band[ri + k] * z[k];
            }
            z[i] = s / self.band[ri + i];
        }
        for i in (0..self.n).rev() {
            let ri = i * stride + w - i;
            z[i] /= self.band[ri + i];
            let zi = z[i];
            for k in i.saturating_sub(w)..i {
                z[k] -= self.band[ri + k] * zi;
            }
        }
    }

    /// Solves `L v = rhs` with the lower factor only.
    pub fn forward_solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let (w, stride) = (self.w, self.w + 1);
        let mut z = rhs.to_vec();
        for i in 0..self.n {
            let ri = i * stride + w - i;
            let mut s = z[i];
            for k in i.saturating_sub(w)..i {
                s -= self.band[ri + k] * z[k];
            }
            z[i] = s / self.band[ri + i];
        }
        z
    }

    /// Solves `Lᵀ v = rhs` with the lower factor only.
    pub fn backward_solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let (w, stride) = (self.w, self.w + 1);
        let mut z = rhs.to_vec();
        for i in (0..self.n).rev() {
            let ri = i * stride + w - i;
            z[i] /= self.band[ri + i];
            let zi = z[i];
            for k in i.saturating_sub(w)..i {
                z[k] -= self.band[ri + k] * zi;
            }
        }
        z
    }
}
