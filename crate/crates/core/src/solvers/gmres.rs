use std::time::Instant;

use super::{residual_norm, SolveOptions, SolveResult};
use crate::error::Result;
use crate::linalg::{axpy, dot, norm2, SparseMatrix, SpdFactorization};
use crate::problem::SaddlePointSystem;

/// Right preconditioner for the assembled system.
#[derive(Debug, Clone)]
pub enum GmresPreconditioner {
    None,
    /// `blockdiag(Â, I)` given a factorization of `Â`.
    BlockDiag(SpdFactorization),
}

impl GmresPreconditioner {
    /// `blockdiag(Â, I)` with `Â` the band of `A` of half-width `w`.
    pub fn block_diag_band(system: &SaddlePointSystem, w: usize) -> Result<Self> {
        let band = system.a.extract_band(w)?;
        Ok(Self::BlockDiag(SpdFactorization::from_sparse(&band)?))
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::None => v.to_vec(),
            Self::BlockDiag(f) => {
                let mut out = v.to_vec();
                let m = f.dim();
                f.solve_in_place(&mut out[..m]);
                out
            }
        }
    }
}

/// Restarted GMRES on `[A B; −Bᵀ 0]` from the zero vector. `restart = None`
/// never restarts. Iterations count Arnoldi steps.
pub fn solve_gmres(
    system: &SaddlePointSystem,
    opts: &SolveOptions,
    restart: Option<usize>,
    precond: &GmresPreconditioner,
) -> Result<SolveResult> {
    opts.check()?;
    let start = Instant::now();
    let op: SparseMatrix = system.assemble();
    let rhs = system.assembled_rhs();
    let (m, dim) = (system.m(), op.nrows());
    let restart = restart.unwrap_or(opts.max_iter).clamp(1, dim.max(1));
    let bnorm = norm2(&rhs);
    let mut z = vec![0.0; dim];
    let mut history = opts.record_history.then(|| vec![if bnorm == 0.0 { 0.0 } else { 1.0 }]);
    let mut total = 0;
    let mut res = if bnorm == 0.0 { 0.0 } else { 1.0 };

    while res > opts.tol && total < opts.max_iter {
        let az = op.spmv(&z)?;
        let r: Vec<f64> = rhs.iter().zip(&az).map(|(b, v)| b - v).collect();
        let beta = norm2(&r);
        if beta / bnorm <= opts.tol {
            res = beta / bnorm;
            break;
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<f64>>()];
        let mut h: Vec<Vec<f64>> = Vec::new();
        let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
        let mut g = vec![beta];
        for j in 0..restart {
            if total >= opts.max_iter {
                break;
            }
            let mut w = op.spmv(&precond.apply(&basis[j]))?;
            let mut col = vec![0.0; j + 2];
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    col[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            let hn = norm2(&w);
            col[j + 1] = hn;
            for i in 0..j {
                let (a, b) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * b;
                col[i + 1] = -sn[i] * a + cs[i] * b;
            }
            let den = col[j].hypot(col[j + 1]);
            let (c, s) = if den == 0.0 { (1.0, 0.0) } else { (col[j] / den, col[j + 1] / den) };
            col[j] = den;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            total += 1;
            let est = g[j + 1].abs() / bnorm;
            if let Some(hist) = history.as_mut() {
                hist.push(est);
            }
            if est <= opts.tol || hn <= f64::EPSILON * beta {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let k = h.len();
        let mut coef = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|l| h[l][i] * coef[l]).sum();
            coef[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![0.0; dim];
        for (c, v) in coef.iter().zip(&basis) {
            axpy(*c, v, &mut update);
        }
        axpy(1.0, &precond.apply(&update), &mut z);
        res = residual_norm(system, &z[..m], &z[m..]) / bnorm;
        if !res.is_finite() {
            break;
        }
    }
    let converged = res <= opts.tol;
    let y = z.split_off(m);
    Ok(SolveResult {
        x: z,
        y,
        iterations: total,
        converged,
        diverged: !converged && !(res <= 1.0),
        final_res: res,
        res_history: history,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
