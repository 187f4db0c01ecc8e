use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |m[{row},{col}] - m[{col},{row}]| = {diff:e}")]
    Asymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotSpd { row: usize, pivot: f64 },

    #[error("dimension {dim} exceeds dense oracle cap {cap}")]
    OracleCapExceeded { dim: usize, cap: usize },

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { iterations: usize, what: String },

    #[error("singular preconditioner: {0}")]
    SingularPreconditioner(String),

    #[error("parameter violation: {}", .0.join("; "))]
    ParamViolation(Vec<String>),

    #[error("degenerate splitting parameter a = {a}: {reason}")]
    DegenerateA { a: f64, reason: String },

    #[error("degenerate omega2 = {omega2}: {reason}")]
    DegenerateOmega2 { omega2: f64, reason: String },

    #[error("no optimum available: {0}")]
    Infeasible(String),

    #[error("no convergence region coded for {0}")]
    RegionNotCoded(String),

    #[error("invalid spectral bounds: {0}")]
    InvalidBounds(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
