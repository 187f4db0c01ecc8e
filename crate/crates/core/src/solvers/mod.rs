//! Stationary iterations and a restarted GMRES baseline.

mod gmres;
mod stationary;

pub use gmres::{solve_gmres, GmresPreconditioner};
pub use stationary::{solve_stationary, solve_stationary_from, stationary_step};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::problem::SaddlePointSystem;

/// Relative residual growth past which an iteration is abandoned as divergent.
pub const DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub record_history: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1200, record_history: false }
    }
}

impl SolveOptions {
    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::ParamViolation(vec![format!("tol = {} must be positive", self.tol)]));
        }
        if self.max_iter == 0 {
            return Err(Error::ParamViolation(vec!["max_iter must be at least 1".into()]));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Residual grew past the starting residual or became non-finite.
    pub diverged: bool,
    pub final_res: f64,
    /// `RES` after each iteration, starting with the initial value 1.
    pub res_history: Option<Vec<f64>>,
    pub wall_seconds: f64,
}

fn residual_norm(system: &SaddlePointSystem, x: &[f64], y: &[f64]) -> f64 {
    let (r1, r2) = system.residual(x, y);
    norm2(&r1).hypot(norm2(&r2))
}

fn check_dims(system: &SaddlePointSystem, x: &[f64], y: &[f64]) -> Result<()> {
    for (expected, got) in [(system.m(), x.len()), (system.n(), y.len())] {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
    }
    Ok(())
}

/// Residual norm at `(x, y)` relative to the one at `(x0, y0)`; 0 when the
/// start is already exact.
pub fn residual_res(system: &SaddlePointSystem, x: &[f64], y: &[f64], x0: &[f64], y0: &[f64]) -> Result<f64> {
    check_dims(system, x, y)?;
    check_dims(system, x0, y0)?;
    let den = residual_norm(system, x0, y0);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(residual_norm(system, x, y) / den)
}
