use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SYMMETRY_TOL};

/// Compressed sparse row matrix. Column indices within each row are strictly
/// increasing and no stored value is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that sum to zero are dropped.
    ///
    /// Panics if an index is out of range.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, _) in &t {
            assert!(i < rows && j < cols, "triplet ({i},{j}) outside {rows}x{cols}");
        }
        t.sort_by_key(|e| (e.0, e.1));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        let mut k = 0;
        while k < t.len() {
            let (i, j, mut v) = t[k];
            k += 1;
            while k < t.len() && t[k].0 == i && t[k].1 == j {
                v += t[k].2;
                k += 1;
            }
            if v != 0.0 {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
            }
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Self { rows, cols, indptr, indices, values }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)))
    }

    /// `n x n` matrix with constant sub-, main and super-diagonal.
    pub fn tridiag(n: usize, sub: f64, diag: f64, sup: f64) -> Self {
        let mut t = Vec::with_capacity(3 * n);
        for i in 0..n {
            if i > 0 {
                t.push((i, i - 1, sub));
            }
            t.push((i, i, diag));
            if i + 1 < n {
                t.push((i, i + 1, sup));
            }
        }
        Self::from_triplets(n, n, t)
    }

    pub fn from_dense(d: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                t.push((i, j, d[(i, j)]));
            }
        }
        Self::from_triplets(d.nrows(), d.ncols(), t)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: other.rows });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.cols });
        }
        Ok(Self::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets())))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(i, j, v)| (j, i, v)))
    }

    /// Kronecker product `a ⊗ b`.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let mut t = Vec::with_capacity(a.nnz() * b.nnz());
        for (i, j, av) in a.triplets() {
            for (k, l, bv) in b.triplets() {
                t.push((i * b.rows + k, j * b.cols + l, av * bv));
            }
        }
        Self::from_triplets(a.rows * b.rows, a.cols * b.cols, t)
    }

    /// Block diagonal matrix with the given blocks.
    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut t = Vec::new();
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            t.extend(b.triplets().map(|(i, j, v)| (r0 + i, c0 + j, v)));
            r0 += b.rows;
            c0 += b.cols;
        }
        Self::from_triplets(rows, cols, t)
    }

    /// Stacks blocks on top of each other. All blocks must share a column count.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut t = Vec::new();
        let mut r0 = 0;
        for b in blocks {
            if b.cols != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: b.cols });
            }
            t.extend(b.triplets().map(|(i, j, v)| (r0 + i, j, v)));
            r0 += b.rows;
        }
        Ok(Self::from_triplets(r0, cols, t))
    }

    /// Keeps entries with `|i - j| <= half_bandwidth`.
    pub fn extract_band(&self, half_bandwidth: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(Self::from_triplets(
            self.rows,
            self.cols,
            self.triplets().filter(|&(i, j, _)| i.abs_diff(j) <= half_bandwidth),
        ))
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0)
    }

    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, got: v.len() });
        }
        let mut out = vec![0.0; self.rows];
        self.spmv_into(v, &mut out);
        Ok(out)
    }

    /// `out = self * v`. Panics on dimension mismatch.
    pub fn spmv_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * v[self.indices[k]];
            }
            *o = s;
        }
    }

    pub fn spmv_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let mut out = vec![0.0; self.cols];
        self.spmv_transpose_into(v, &mut out);
        Ok(out)
    }

    /// `out = selfᵀ * v`. Panics on dimension mismatch.
    pub fn spmv_transpose_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out[self.indices[k]] += self.values[k] * vi;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks `|m[i,j] - m[j,i]| <= SYMMETRY_TOL * max|m|` for every entry.
    pub fn check_symmetric(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let tol = SYMMETRY_TOL * self.max_abs();
        for (i, j, v) in self.triplets() {
            let diff = (v - self.get(j, i)).abs();
            if diff > tol {
                return Err(Error::Asymmetric { row: i, col: j, diff });
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identity_factor() {
        let k = SparseMatrix::kron(&SparseMatrix::identity(2), &SparseMatrix::from_triplets(1, 1, [(0, 0, 2.0)]));
        assert_eq!(k.to_dense(), DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]));
    }

    #[test]
    fn kron_shift_pattern() {
        let s = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0)]);
        let k = SparseMatrix::kron(&s, &SparseMatrix::identity(2));
        assert_eq!((k.nrows(), k.ncols(), k.nnz()), (4, 4, 2));
        assert_eq!(k.get(0, 2), 1.0);
        assert_eq!(k.get(1, 3), 1.0);
    }

    #[test]
    fn kron_identity_with_laplacian_block() {
        let t = SparseMatrix::tridiag(2, -1.0, 2.0, -1.0).scaled(9.0);
        let k = SparseMatrix::kron(&SparseMatrix::identity(2), &t);
        let block = [[18.0, -9.0], [-9.0, 18.0]];
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i / 2 == j / 2 { block[i % 2][j % 2] } else { 0.0 };
                assert_eq!(k.get(i, j), expect);
            }
        }
    }

    #[test]
    fn spmv_examples() {
        let id = SparseMatrix::identity(3);
        assert_eq!(id.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let t = SparseMatrix::tridiag(3, -1.0, 2.0, -1.0);
        assert_eq!(t.spmv(&[1.0; 3]).unwrap(), vec![1.0, 0.0, 1.0]);
        let z = SparseMatrix::from_triplets(2, 2, [(1, 1, 5.0)]);
        assert_eq!(z.spmv(&[7.0, 1.0]).unwrap(), vec![0.0, 5.0]);
        assert!(matches!(t.spmv(&[1.0; 2]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spmv_transpose_matches_transpose() {
        let m = SparseMatrix::from_triplets(2, 3, [(0, 0, 1.0), (0, 2, 2.0), (1, 1, -3.0)]);
        let v = [1.0, 2.0];
        assert_eq!(m.spmv_transpose(&v).unwrap(), m.transpose().spmv(&v).unwrap());
    }

    #[test]
    fn band_extraction() {
        let ones = SparseMatrix::from_triplets(3, 3, (0..9).map(|k| (k / 3, k % 3, 1.0)));
        assert_eq!(ones.extract_band(0).unwrap(), SparseMatrix::identity(3));
        let t = SparseMatrix::tridiag(3, -1.0, 2.0, -1.0);
        assert_eq!(t.extract_band(1).unwrap(), t);
        let rect = SparseMatrix::zeros(2, 3);
        assert!(matches!(rect.extract_band(1), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn duplicates_summed_and_zeros_dropped() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 0, 1.0), (0, 0, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 0), 3.0);
    }

    #[test]
    fn symmetry_check() {
        assert!(SparseMatrix::tridiag(4, -1.0, 2.0, -1.0).check_symmetric().is_ok());
        let bad = SparseMatrix::tridiag(4, -1.0, 2.0, -1.1);
        assert!(matches!(bad.check_symmetric(), Err(Error::Asymmetric { .. })));
    }
}
