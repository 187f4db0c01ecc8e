//! Upwind finite-difference Stokes test problem and Schur-complement
//! approximations `Q`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix, SpdFactorization};
use crate::spectral::QSign;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesConfig {
    /// Interior grid points per direction.
    pub p: usize,
    pub viscosity: f64,
}

impl StokesConfig {
    pub fn new(p: usize) -> Self {
        Self { p, viscosity: 1.0 }
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.p as f64 + 1.0)
    }

    pub fn m(&self) -> usize {
        2 * self.p * self.p
    }

    pub fn n(&self) -> usize {
        self.p * self.p
    }
}

/// `[A B; −Bᵀ 0] (x; y) = (b1; −b2)`
#[derive(Debug, Clone)]
pub struct SaddlePointSystem {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
}

impl SaddlePointSystem {
    /// Checks block dimensions and the symmetry of `A`.
    pub fn new(a: SparseMatrix, b: SparseMatrix, b1: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        for (expected, got) in [(a.nrows(), b.nrows()), (a.nrows(), b1.len()), (b.ncols(), b2.len())] {
            if expected != got {
                return Err(Error::DimensionMismatch { expected, got });
            }
        }
        a.check_symmetric()?;
        Ok(Self { a, b, b1, b2 })
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.b.ncols()
    }

    pub fn factor_a(&self) -> Result<SpdFactorization> {
        SpdFactorization::from_sparse(&self.a)
    }

    pub fn with_rhs(mut self, b1: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        if b1.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), got: b1.len() });
        }
        if b2.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: b2.len() });
        }
        self.b1 = b1;
        self.b2 = b2;
        Ok(self)
    }

    /// `(b1 − A x − B y, b2 − Bᵀ x)`
    pub fn residual(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut r1 = self.a.spmv(x).expect("x length");
        let by = self.b.spmv(y).expect("y length");
        for i in 0..r1.len() {
            r1[i] = self.b1[i] - r1[i] - by[i];
        }
        let mut r2 = self.b.spmv_transpose(x).expect("x length");
        for (r, b) in r2.iter_mut().zip(&self.b2) {
            *r = b - *r;
        }
        (r1, r2)
    }

    /// Full `(m+n)` coefficient matrix `[A B; −Bᵀ 0]`.
    pub fn assemble(&self) -> SparseMatrix {
        let m = self.m();
        let t = self
            .a
            .triplets()
            .chain(self.b.triplets().map(|(i, j, v)| (i, m + j, v)))
            .chain(self.b.triplets().map(|(i, j, v)| (m + j, i, -v)));
        SparseMatrix::from_triplets(m + self.n(), m + self.n(), t)
    }

    /// Right-hand side `(b1; −b2)` of the assembled system.
    pub fn assembled_rhs(&self) -> Vec<f64> {
        self.b1.iter().copied().chain(self.b2.iter().map(|v| -v)).collect()
    }
}

/// How `Q ≈ BᵀA⁻¹B` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QCase {
    /// `Q = Bᵀ tridiag(A)⁻¹ B`
    TridiagA,
    /// `Q = Bᵀ diag(A)⁻¹ B`
    DiagA,
    /// `Q = tridiag(Bᵀ tridiag(A)⁻¹ B)`
    TridiagSchur,
}

impl QCase {
    pub const ALL: [QCase; 3] = [QCase::TridiagA, QCase::DiagA, QCase::TridiagSchur];

    pub fn name(self) -> &'static str {
        match self {
            QCase::TridiagA => "tridiag",
            QCase::DiagA => "diag",
            QCase::TridiagSchur => "tridiag-schur",
        }
    }
}

impl fmt::Display for QCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tridiag" | "1" | "case1" => Ok(QCase::TridiagA),
            "diag" | "2" | "case2" => Ok(QCase::DiagA),
            "tridiag-schur" | "tridiag_schur" | "schur" => Ok(QCase::TridiagSchur),
            other => Err(Error::Parse { line: 0, msg: format!("unknown q case {other:?}") }),
        }
    }
}

/// Definite `Q` together with a factorization of `±Q`.
#[derive(Debug, Clone)]
pub struct QMatrix {
    dense: DenseMatrix,
    sign: QSign,
    factor: SpdFactorization,
}

impl QMatrix {
    pub fn new(dense: DenseMatrix, sign: QSign) -> Result<Self> {
        let factor = match sign {
            QSign::PositiveDefinite => SpdFactorization::from_dense(&dense)?,
            QSign::NegativeDefinite => SpdFactorization::from_dense(&dense.scaled(-1.0))?,
        };
        Ok(Self { dense, sign, factor })
    }

    pub fn dense(&self) -> &DenseMatrix {
        &self.dense
    }

    pub fn sign(&self) -> QSign {
        self.sign
    }

    pub fn dim(&self) -> usize {
        self.dense.nrows()
    }

    /// Factor of `sign · Q`, which is positive definite.
    pub fn definite_factor(&self) -> &SpdFactorization {
        &self.factor
    }

    /// `Q⁻¹ rhs`
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut z = self.factor.solve(rhs);
        if self.sign == QSign::NegativeDefinite {
            z.iter_mut().for_each(|v| *v = -*v);
        }
        z
    }

    /// `−Q`, negative definite if `Q` was positive definite and vice versa.
    pub fn negated(&self) -> Self {
        Self {
            dense: self.dense.scaled(-1.0),
            sign: match self.sign {
                QSign::PositiveDefinite => QSign::NegativeDefinite,
                QSign::NegativeDefinite => QSign::PositiveDefinite,
            },
            factor: self.factor.clone(),
        }
    }
}

/// Assembles `A` and `B` for the upwind Stokes discretization; the right-hand
/// sides are zero.
pub fn build_stokes(cfg: &StokesConfig) -> Result<SaddlePointSystem> {
    let p = cfg.p;
    if p == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    if !(cfg.viscosity > 0.0) {
        return Err(Error::InvalidBounds(format!("viscosity must be positive, got {}", cfg.viscosity)));
    }
    let h = cfg.h();
    let t = SparseMatrix::tridiag(p, -1.0, 2.0, -1.0).scaled(cfg.viscosity / (h * h));
    let f = SparseMatrix::tridiag(p, -1.0, 1.0, 0.0).scaled(1.0 / h);
    let id = SparseMatrix::identity(p);

    let lap = SparseMatrix::kron(&id, &t).add(&SparseMatrix::kron(&t, &id))?;
    let a = SparseMatrix::block_diag(&[&lap, &lap]);
    let b = SparseMatrix::vstack(&[&SparseMatrix::kron(&id, &f), &SparseMatrix::kron(&f, &id)])?;
    let (m, n) = (cfg.m(), cfg.n());
    SaddlePointSystem::new(a, b, vec![0.0; m], vec![0.0; n])
}

/// Right-hand sides whose exact solution is all ones.
pub fn rhs_exact_ones(system: &SaddlePointSystem) -> (Vec<f64>, Vec<f64>) {
    let ones_m = vec![1.0; system.m()];
    let ones_n = vec![1.0; system.n()];
    let mut b1 = system.a.spmv(&ones_m).expect("square A");
    for (v, w) in b1.iter_mut().zip(system.b.spmv(&ones_n).expect("B columns")) {
        *v += w;
    }
    let b2 = system.b.spmv_transpose(&ones_m).expect("B rows");
    (b1, b2)
}

/// Stokes system of grid size `p` with the all-ones exact solution.
pub fn stokes_problem(p: usize) -> Result<SaddlePointSystem> {
    let sys = build_stokes(&StokesConfig::new(p))?;
    let (b1, b2) = rhs_exact_ones(&sys);
    sys.with_rhs(b1, b2)
}

/// `Bᵀ M⁻¹ B` for an SPD factor `M`, one column per solve.
pub(crate) fn congruence(b: &SparseMatrix, factor: &SpdFactorization) -> DenseMatrix {
    let bt = b.transpose();
    let n = b.ncols();
    let m = b.nrows();
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![0.0; m];
            for (i, v) in bt.row(j) {
                col[i] = v;
            }
            factor.solve_in_place(&mut col);
            bt.spmv(&col).expect("dimensions")
        })
        .collect();
    let mut q = DenseMatrix::from_columns(n, &cols);
    // symmetrize the rounding
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (q[(i, j)] + q[(j, i)]);
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    q
}

pub fn build_q(system: &SaddlePointSystem, case: QCase) -> Result<QMatrix> {
    let half_bandwidth = match case {
        QCase::TridiagA | QCase::TridiagSchur => 1,
        QCase::DiagA => 0,
    };
    let a_hat = system.a.extract_band(half_bandwidth)?;
    let factor = SpdFactorization::from_sparse(&a_hat)?;
    let mut q = congruence(&system.b, &factor);
    if case == QCase::TridiagSchur {
        let n = q.nrows();
        q = DenseMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) <= 1 { q[(i, j)] } else { 0.0 });
    }
    QMatrix::new(q, QSign::PositiveDefinite)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        for (p, m, n) in [(2, 8, 4), (8, 128, 64), (40, 3200, 1600)] {
            let cfg = StokesConfig::new(p);
            assert_eq!((cfg.m(), cfg.n()), (m, n));
        }
        let sys = build_stokes(&StokesConfig::new(8)).unwrap();
        assert_eq!((sys.m(), sys.n(), sys.m() + sys.n()), (128, 64, 192));
    }

    #[test]
    fn p2_blocks() {
        let sys = build_stokes(&StokesConfig::new(2)).unwrap();
        // T = 9 tridiag(-1,2,-1), I⊗T + T⊗I has 36 on the diagonal
        assert_eq!(sys.a.get(0, 0), 36.0);
        assert_eq!(sys.a.get(0, 1), -9.0);
        assert_eq!(sys.a.get(0, 2), -9.0);
        assert_eq!(sys.a.get(1, 2), 0.0);
        // first block of B is I⊗F with F = 3 [[1,0],[-1,1]]
        assert_eq!(sys.b.get(0, 0), 3.0);
        assert_eq!(sys.b.get(1, 0), -3.0);
        assert_eq!(sys.b.get(1, 1), 3.0);
        assert_eq!(sys.b.get(0, 1), 0.0);
    }

    #[test]
    fn band_of_p2_laplacian_drops_far_couplings() {
        let sys = build_stokes(&StokesConfig::new(2)).unwrap();
        let band = sys.a.extract_band(1).unwrap();
        for i in 0..8 {
            assert_eq!(band.get(i, i), 36.0);
            for j in 0..8 {
                if i.abs_diff(j) > 1 {
                    assert_eq!(band.get(i, j), 0.0);
                }
            }
        }
        // within-block neighbours kept, the T⊗I coupling at distance p = 2 dropped
        assert_eq!(band.get(0, 1), -9.0);
        assert_eq!(band.get(0, 2), 0.0);
        assert_eq!(sys.a.get(0, 2), -9.0);
        // the two velocity blocks are not coupled
        assert_eq!(band.get(3, 4), 0.0);
    }

    #[test]
    fn diag_case_q_is_scaled_normal_matrix() {
        let sys = build_stokes(&StokesConfig::new(2)).unwrap();
        let q = build_q(&sys, QCase::DiagA).unwrap();
        let btb = sys.b.to_dense().transpose().matmul(&sys.b.to_dense()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((q.dense()[(i, j)] - btb[(i, j)] / 36.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exact_rhs_has_zero_residual() {
        let sys = stokes_problem(2).unwrap();
        let (r1, r2) = sys.residual(&vec![1.0; sys.m()], &vec![1.0; sys.n()]);
        assert!(r1.iter().chain(&r2).all(|v| *v == 0.0));
        for j in 0..sys.n() {
            let colsum: f64 = (0..sys.m()).map(|i| sys.b.get(i, j)).sum();
            assert_eq!(sys.b2[j], colsum);
        }
    }

    #[test]
    fn q_cases_are_spd_and_symmetric() {
        let sys = build_stokes(&StokesConfig::new(5)).unwrap();
        assert!(sys.factor_a().is_ok());
        for case in QCase::ALL {
            let q = build_q(&sys, case).unwrap();
            q.dense().check_symmetric().unwrap();
            assert_eq!(q.dim(), 25);
        }
    }

    #[test]
    fn negated_q_solves_with_flipped_sign() {
        let sys = build_stokes(&StokesConfig::new(3)).unwrap();
        let q = build_q(&sys, QCase::DiagA).unwrap();
        let nq = q.negated();
        assert_eq!(nq.sign(), QSign::NegativeDefinite);
        let rhs: Vec<f64> = (0..9).map(|i| i as f64 - 4.0).collect();
        let z = nq.solve(&rhs);
        let back = nq.dense().matvec(&z).unwrap();
        for (b, r) in back.iter().zip(&rhs) {
            assert!((b - r).abs() < 1e-12);
        }
    }

    #[test]
    fn assembled_operator_matches_blocks() {
        let sys = stokes_problem(2).unwrap();
        let full = sys.assemble();
        let u = vec![1.0; sys.m() + sys.n()];
        let r = full.spmv(&u).unwrap();
        let rhs = sys.assembled_rhs();
        for (a, b) in r.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
