//! Stationary SOR/PSD-type iterations for block saddle-point systems
//!
//! ```text
//! [ A   B ] [x]   [ b1]
//! [-Bᵀ  0 ] [y] = [-b2]
//! ```
//!
//! with `A` symmetric positive definite and `B` of full column rank. The crate
//! covers the Stokes test-problem generator, spectral analysis of
//! `J = Q⁻¹BᵀA⁻¹B`, closed-form optimal parameters and convergence regions,
//! the iteration loops themselves, a restarted GMRES baseline, and a small
//! experiment runner.

pub mod bench;
pub mod error;
pub mod linalg;
pub mod method;
pub mod params;
pub mod problem;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SparseMatrix, SpdFactorization};
pub use method::{Family, MethodId, MethodParams};
pub use params::{OptimalResult, RegionVerdict};
pub use solvers::{SolveOptions, SolveResult};
pub use problem::{QCase, QMatrix, SaddlePointSystem, StokesConfig};
pub use spectral::{QSign, SpectralBounds};

