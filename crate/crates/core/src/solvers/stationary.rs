use std::time::Instant;

use super::{check_dims, residual_norm, SolveOptions, SolveResult, DIVERGENCE_CAP};
use crate::error::Result;
use crate::linalg::SpdFactorization;
use crate::method::{Family, MethodId, MethodParams};
use crate::problem::{QMatrix, SaddlePointSystem};

/// Runs the recurrence of `params.method` from the zero vector.
pub fn solve_stationary(
    system: &SaddlePointSystem,
    a_factor: &SpdFactorization,
    q: &QMatrix,
    params: &MethodParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let (x0, y0) = (vec![0.0; system.m()], vec![0.0; system.n()]);
    solve_stationary_from(system, a_factor, q, params, opts, &x0, &y0)
}

pub fn solve_stationary_from(
    system: &SaddlePointSystem,
    a_factor: &SpdFactorization,
    q: &QMatrix,
    params: &MethodParams,
    opts: &SolveOptions,
    x0: &[f64],
    y0: &[f64],
) -> Result<SolveResult> {
    params.check()?;
    opts.check()?;
    check_dims(system, x0, y0)?;
    let start = Instant::now();
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    let den = residual_norm(system, &x, &y);
    let mut history = opts.record_history.then(|| vec![if den == 0.0 { 0.0 } else { 1.0 }]);
    let finish = |x, y, iterations, res: f64, history, converged| SolveResult {
        x,
        y,
        iterations,
        converged,
        diverged: !converged && !(res <= 1.0),
        final_res: res,
        res_history: history,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    if den == 0.0 {
        return Ok(finish(x, y, 0, 0.0, history, true));
    }
    let mut res = 1.0;
    for k in 1..=opts.max_iter {
        (x, y) = stationary_step(system, a_factor, q, params, &x, &y);
        res = residual_norm(system, &x, &y) / den;
        if let Some(h) = history.as_mut() {
            h.push(res);
        }
        if res <= opts.tol {
            return Ok(finish(x, y, k, res, history, true));
        }
        if !res.is_finite() || res > DIVERGENCE_CAP {
            return Ok(finish(x, y, k, res, history, false));
        }
    }
    Ok(finish(x, y, opts.max_iter, res, history, false))
}

/// One outer iteration `(xᵏ, yᵏ) → (xᵏ⁺¹, yᵏ⁺¹)`.
pub fn stationary_step(
    system: &SaddlePointSystem,
    a_factor: &SpdFactorization,
    q: &QMatrix,
    p: &MethodParams,
    x: &[f64],
    y: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let (t1, t2, w1, w2, a) = (p.tau1, p.tau2, p.omega1, p.omega2, p.a);
    let b = &system.b;
    let mut by = b.spmv(y).expect("y length");
    if p.method == MethodId::SimplifiedGmpsd {
        let y_new = update_y(q, y, 1.0, &btx(system, x), &system.b2, t2);
        by = b.spmv(&y_new).expect("y length");
        let rhs: Vec<f64> = system.b1.iter().zip(&by).map(|(f, g)| t1 * (f - g)).collect();
        let x_new = relax_x(a_factor, x, t1, rhs);
        return (x_new, y_new);
    }
    match p.family() {
        Family::Forward => {
            let rhs: Vec<f64> = system.b1.iter().zip(&by).map(|(f, g)| t1 * (f - g)).collect();
            let x_new = relax_x(a_factor, x, t1, rhs);
            let mix: Vec<f64> = x_new.iter().zip(x).map(|(xn, xo)| w2 * xn + (t2 - w2) * xo).collect();
            let y_new = update_y(q, y, t2, &btx(system, &mix), &system.b2, 1.0 / (1.0 - a * w2));
            (x_new, y_new)
        }
        Family::Backward => {
            let scale = t2 / (1.0 - (1.0 - a) * w2);
            let y_new = update_y(q, y, 1.0, &btx(system, x), &system.b2, scale);
            let dy: Vec<f64> = y_new.iter().zip(y).map(|(n, o)| n - o).collect();
            let bdy = b.spmv(&dy).expect("y length");
            let rhs: Vec<f64> = (0..x.len()).map(|i| t1 * (system.b1[i] - by[i]) - w1 * bdy[i]).collect();
            (relax_x(a_factor, x, t1, rhs), y_new)
        }
        Family::Product => {
            let d = (1.0 - a * w2) * (1.0 - (1.0 - a) * w2);
            let r: Vec<f64> = system.b1.iter().zip(&by).map(|(f, g)| f - g).collect();
            let ar = a_factor.solve(&r);
            let mix: Vec<f64> = x.iter().zip(&ar).map(|(xi, zi)| (t2 - t1 * w2) * xi + t1 * w2 * zi).collect();
            let y_new = update_y(q, y, t2, &btx(system, &mix), &system.b2, 1.0 / d);
            let comb: Vec<f64> = y.iter().zip(&y_new).map(|(o, n)| (w1 - t1) * o - w1 * n).collect();
            let bc = b.spmv(&comb).expect("y length");
            let rhs: Vec<f64> = bc.iter().zip(&system.b1).map(|(g, f)| g + t1 * f).collect();
            (relax_x(a_factor, x, t1, rhs), y_new)
        }
    }
}

fn btx(system: &SaddlePointSystem, x: &[f64]) -> Vec<f64> {
    system.b.spmv_transpose(x).expect("x length")
}

/// `(1 − τ₁)x + A⁻¹ rhs`
fn relax_x(a_factor: &SpdFactorization, x: &[f64], t1: f64, mut rhs: Vec<f64>) -> Vec<f64> {
    a_factor.solve_in_place(&mut rhs);
    for (r, xi) in rhs.iter_mut().zip(x) {
        *r += (1.0 - t1) * xi;
    }
    rhs
}

/// `y + scale · Q⁻¹(bt − weight · b₂)`
fn update_y(q: &QMatrix, y: &[f64], weight: f64, bt: &[f64], b2: &[f64], scale: f64) -> Vec<f64> {
    let r: Vec<f64> = bt.iter().zip(b2).map(|(u, v)| u - weight * v).collect();
    let z = q.solve(&r);
    y.iter().zip(&z).map(|(yi, zi)| yi + scale * zi).collect()
}
