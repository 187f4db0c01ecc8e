//! Spectrum of `J = Q⁻¹BᵀA⁻¹B`, the quadratic linking each eigenvalue `μ` of
//! `J` to eigenvalues `λ` of the iteration matrix, and a dense realization
//! of the iteration matrix used as an oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, dense_sym_eig_capped, DenseMatrix, SpdFactorization, ORACLE_CAP};
use crate::method::{Family, MethodParams};
use crate::problem::{congruence, QMatrix, SaddlePointSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QSign {
    PositiveDefinite,
    NegativeDefinite,
}

impl QSign {
    pub fn factor(self) -> f64 {
        match self {
            QSign::PositiveDefinite => 1.0,
            QSign::NegativeDefinite => -1.0,
        }
    }
}

/// Extreme eigenvalues of `J`. Both have the sign of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub mu_min: f64,
    pub mu_max: f64,
    pub q_sign: QSign,
}

impl SpectralBounds {
    pub fn new(mu_min: f64, mu_max: f64, q_sign: QSign) -> Result<Self> {
        let ok = mu_min.is_finite()
            && mu_max.is_finite()
            && mu_min <= mu_max
            && match q_sign {
                QSign::PositiveDefinite => mu_min > 0.0,
                QSign::NegativeDefinite => mu_max < 0.0,
            };
        if !ok {
            return Err(Error::InvalidBounds(format!("({mu_min}, {mu_max}) with {q_sign:?} Q")));
        }
        Ok(Self { mu_min, mu_max, q_sign })
    }

    pub fn positive(mu_min: f64, mu_max: f64) -> Result<Self> {
        Self::new(mu_min, mu_max, QSign::PositiveDefinite)
    }

    pub fn negative(mu_min: f64, mu_max: f64) -> Result<Self> {
        Self::new(mu_min, mu_max, QSign::NegativeDefinite)
    }

    /// Bounds of a sign-consistent spectrum.
    pub fn from_spectrum(mu: &[f64], q_sign: QSign) -> Result<Self> {
        let lo = mu.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(lo, hi, q_sign)
    }

    /// `√(μ_min μ_max)`, positive for either sign of `Q`.
    pub fn geometric_mean(&self) -> f64 {
        (self.mu_min * self.mu_max).sqrt()
    }

    /// `|μ|` at the endpoint nearest zero and farthest from zero.
    pub fn abs_range(&self) -> (f64, f64) {
        let (a, b) = (self.mu_min.abs(), self.mu_max.abs());
        (a.min(b), a.max(b))
    }
}

/// `S = BᵀA⁻¹B`.
pub fn schur_complement(system: &SaddlePointSystem) -> Result<DenseMatrix> {
    let factor = system.factor_a()?;
    Ok(congruence(&system.b, &factor))
}

/// Cholesky congruence `L⁻¹ S L⁻ᵀ` for `±Q = L Lᵀ`.
fn congruent_matrix(s: &DenseMatrix, factor: &SpdFactorization) -> DenseMatrix {
    let n = s.nrows();
    // rows of S are columns of S (symmetric); W = L⁻¹S column by column
    let w: Vec<Vec<f64>> = (0..n).into_par_iter().map(|j| factor.forward_solve(s.row(j))).collect();
    // (L⁻¹S)ᵀ = S L⁻ᵀ, so L⁻¹ S L⁻ᵀ = L⁻¹ Wᵀ where column j of Wᵀ is row j of W
    let wt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| w[j][i]).collect()).collect();
    let cols: Vec<Vec<f64>> = wt.par_iter().map(|c| factor.forward_solve(c)).collect();
    DenseMatrix::from_columns(n, &cols)
}

/// All eigenvalues of `J` in ascending order, with their bounds.
pub fn j_spectrum(s: &DenseMatrix, q: &DenseMatrix, q_sign: QSign) -> Result<(Vec<f64>, SpectralBounds)> {
    j_spectrum_capped(s, q, q_sign, ORACLE_CAP)
}

pub fn j_spectrum_capped(
    s: &DenseMatrix,
    q: &DenseMatrix,
    q_sign: QSign,
    cap: usize,
) -> Result<(Vec<f64>, SpectralBounds)> {
    if s.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch { expected: q.nrows(), got: s.nrows() });
    }
    if q.nrows() > cap {
        return Err(Error::OracleCapExceeded { dim: q.nrows(), cap });
    }
    s.check_symmetric()?;
    let factor = SpdFactorization::from_dense(&q.scaled(q_sign.factor()))?;
    let c = congruent_matrix(s, &factor);
    let c = DenseMatrix::from_fn(c.nrows(), c.ncols(), |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let mut mu: Vec<f64> = dense_sym_eig_capped(&c, cap)?.into_iter().map(|v| v * q_sign.factor()).collect();
    mu.sort_by(f64::total_cmp);
    let bounds = SpectralBounds::from_spectrum(&mu, q_sign)?;
    Ok((mu, bounds))
}

/// Extreme eigenvalues of `J` by Lanczos with full reorthogonalization on
/// `L⁻¹BᵀA⁻¹BL⁻ᵀ`, to relative accuracy `tol`.
pub fn j_bounds(system: &SaddlePointSystem, q: &QMatrix, tol: f64) -> Result<SpectralBounds> {
    let a_factor = system.factor_a()?;
    let l = q.definite_factor();
    let n = system.n();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        let u = l.backward_solve(v);
        let mut bu = system.b.spmv(&u).expect("dims");
        a_factor.solve_in_place(&mut bu);
        let w = system.b.spmv_transpose(&bu).expect("dims");
        l.forward_solve(&w)
    };

    let mut v0: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.618_033_988_749_895).fract() + 0.5).collect();
    let nrm = linalg::norm2(&v0);
    v0.iter_mut().for_each(|x| *x /= nrm);

    let max_steps = n.min(1000);
    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;

    for k in 0..max_steps {
        let mut w = apply(&basis[k]);
        let ak = linalg::dot(&w, &basis[k]);
        alpha.push(ak);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = linalg::dot(&w, v);
                linalg::axpy(-c, v, &mut w);
            }
        }
        let bk = linalg::norm2(&w);
        scale = scale.max(ak.abs()).max(bk);

        let steps = k + 1;
        let exhausted = bk <= 1e-13 * scale || steps == n;
        if exhausted || steps % 5 == 0 || steps == max_steps {
            let t = DMatrix::from_fn(steps, steps, |i, j| {
                if i == j {
                    alpha[i]
                } else if i.abs_diff(j) == 1 {
                    beta[i.min(j)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (mut imin, mut imax) = (0, 0);
            for i in 0..steps {
                if eig.eigenvalues[i] < eig.eigenvalues[imin] {
                    imin = i;
                }
                if eig.eigenvalues[i] > eig.eigenvalues[imax] {
                    imax = i;
                }
            }
            let (lo, hi) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
            let res_lo = (bk * eig.eigenvectors[(steps - 1, imin)]).abs();
            let res_hi = (bk * eig.eigenvectors[(steps - 1, imax)]).abs();
            if exhausted || (res_lo <= tol * lo.abs() && res_hi <= tol * hi.abs()) {
                let sgn = q.sign().factor();
                let (a, b) = (lo * sgn, hi * sgn);
                return SpectralBounds::new(a.min(b), a.max(b), q.sign());
            }
        }
        beta.push(bk);
        basis.push(w.iter().map(|x| x / bk).collect());
    }
    Err(Error::NoConvergence { iterations: max_steps, what: "Lanczos extreme eigenvalues".into() })
}

/// `(β, γ)` with `λ² + (τ₁ − 2 + βμ)λ + 1 − τ₁ + γμ = 0`.
pub fn functional_coefficients(p: &MethodParams) -> Result<(f64, f64)> {
    p.check().map_err(|e| Error::SingularPreconditioner(e.to_string()))?;
    let (t1, t2, w1, w2) = (p.tau1, p.tau2, p.omega1, p.omega2);
    let d = p.q_scale();
    Ok(match p.family() {
        Family::Forward => (t1 * w2 / d, t1 * (t2 - w2) / d),
        Family::Backward => (t2 * w1 / d, t2 * (t1 - w1) / d),
        Family::Product => {
            ((t1 * w2 + t2 * w1 - t1 * w1 * w2) / d, (t1 * t2 - t1 * w2 - t2 * w1 + t1 * w1 * w2) / d)
        }
    })
}

/// Roots of the quadratic for one `μ`, plus the eigenvalue `1 − τ₁` carried
/// by `(x, 0)` with `Bᵀx = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedEigenvalues {
    /// `(re, im)` pairs.
    pub roots: [(f64, f64); 2],
    /// `λ² + bλ + c` coefficients.
    pub b: f64,
    pub c: f64,
    pub fixed: f64,
}

impl PredictedEigenvalues {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.c
    }

    /// Largest root modulus; `√c` when the roots are complex.
    pub fn max_modulus(&self) -> f64 {
        if self.discriminant() < 0.0 {
            self.c.abs().sqrt()
        } else {
            self.roots[0].0.abs().max(self.roots[1].0.abs())
        }
    }
}

pub fn predicted_lambda(p: &MethodParams, mu: f64) -> Result<PredictedEigenvalues> {
    let (beta, gamma) = functional_coefficients(p)?;
    let b = p.tau1 - 2.0 + beta * mu;
    let c = 1.0 - p.tau1 + gamma * mu;
    let disc = b * b - 4.0 * c;
    let roots = if disc < 0.0 {
        let im = 0.5 * (-disc).sqrt();
        [(-0.5 * b, im), (-0.5 * b, -im)]
    } else {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            [(0.0, 0.0), (0.0, 0.0)]
        } else {
            [(q, 0.0), (c / q, 0.0)]
        }
    };
    Ok(PredictedEigenvalues { roots, b, c, fixed: 1.0 - p.tau1 })
}

/// Spectral radius predicted from the quadratic over every `μ` in
/// `spectrum`, including `|1 − τ₁|` when `m > n`.
pub fn predicted_rho(p: &MethodParams, spectrum: &[f64], m_gt_n: bool) -> Result<f64> {
    if spectrum.is_empty() {
        return Err(Error::InvalidBounds("empty spectrum".into()));
    }
    let pos = spectrum.iter().all(|&m| m > 0.0);
    let neg = spectrum.iter().all(|&m| m < 0.0);
    if !(pos || neg) {
        return Err(Error::InvalidBounds("spectrum is not sign-consistent".into()));
    }
    let mut rho: f64 = if m_gt_n { (1.0 - p.tau1).abs() } else { 0.0 };
    for &mu in spectrum {
        rho = rho.max(predicted_lambda(p, mu)?.max_modulus());
    }
    Ok(rho)
}

fn to_na(d: &DenseMatrix) -> DMatrix<f64> {
    d.to_nalgebra()
}

/// Dense `(H, η)` with `u⁺ = H u + η` for the selected method, built from the
/// splitting `𝒜 = 𝒟 − ℒ − 𝒰`, `T = diag(τ₁I, τ₂I)`, `Ω = diag(ω₁I, ω₂I)`.
pub fn iteration_affine(
    system: &SaddlePointSystem,
    q: &DenseMatrix,
    p: &MethodParams,
) -> Result<(DenseMatrix, Vec<f64>)> {
    p.check().map_err(|e| Error::SingularPreconditioner(e.to_string()))?;
    let (m, n) = (system.m(), system.n());
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: q.nrows() });
    }
    let dim = m + n;
    if dim > ORACLE_CAP {
        return Err(Error::OracleCapExceeded { dim, cap: ORACLE_CAP });
    }
    let a = to_na(&system.a.to_dense());
    let b = to_na(&system.b.to_dense());
    let q = to_na(q);
    let bt = b.transpose();

    let mut d = DMatrix::<f64>::zeros(dim, dim);
    d.view_mut((0, 0), (m, m)).copy_from(&a);
    d.view_mut((m, m), (n, n)).copy_from(&q);
    let mut lower = DMatrix::<f64>::zeros(dim, dim);
    lower.view_mut((m, 0), (n, m)).copy_from(&bt);
    lower.view_mut((m, m), (n, n)).copy_from(&(&q * p.a));
    let mut upper = DMatrix::<f64>::zeros(dim, dim);
    upper.view_mut((0, m), (m, n)).copy_from(&(-&b));
    upper.view_mut((m, m), (n, n)).copy_from(&(&q * (1.0 - p.a)));
    let coeff = &d - &lower - &upper;

    let diag_scale = |s1: f64, s2: f64| {
        DMatrix::<f64>::from_diagonal(&DVector::from_fn(dim, |i, _| if i < m { s1 } else { s2 }))
    };
    let t = diag_scale(p.tau1, p.tau2);
    let omega = diag_scale(p.omega1, p.omega2);

    let r = match p.family() {
        Family::Forward => &d - &omega * &lower,
        Family::Backward => &d - &omega * &upper,
        Family::Product => {
            let right = d
                .clone()
                .lu()
                .solve(&(&d - &omega * &upper))
                .ok_or_else(|| Error::SingularPreconditioner("block diagonal part".into()))?;
            (&d - &omega * &lower) * right
        }
    };
    let lu = r.lu();
    if !lu.is_invertible() {
        return Err(Error::SingularPreconditioner(format!("{p}")));
    }
    let rhs: DVector<f64> = DVector::from_vec(system.assembled_rhs());
    let step = lu
        .solve(&(&t * &coeff))
        .ok_or_else(|| Error::SingularPreconditioner(format!("{p}")))?;
    let h = DMatrix::<f64>::identity(dim, dim) - step;
    let eta = lu.solve(&(&t * rhs)).ok_or_else(|| Error::SingularPreconditioner(format!("{p}")))?;
    Ok((DenseMatrix::from_nalgebra(&h), eta.iter().copied().collect()))
}

pub fn iteration_matrix_dense(system: &SaddlePointSystem, q: &DenseMatrix, p: &MethodParams) -> Result<DenseMatrix> {
    iteration_affine(system, q, p).map(|(h, _)| h)
}
