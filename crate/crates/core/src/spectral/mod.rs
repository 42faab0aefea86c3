//! Spectral kernels: symmetric tridiagonal and dense eigensolvers, and
//! Dirichlet Sturm-Liouville problems.

pub mod dense;
pub mod sturm_liouville;
pub mod tridiagonal;

use thiserror::Error;

pub use dense::{dense_symmetric_eigen, EigenPairs, Inertia};
pub use sturm_liouville::{
    conjugate_value, eigencount_below, shooting_value, sl_eigen, EigenResult, SturmLiouvilleProblem,
};
pub use tridiagonal::SymTridiagonal;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("shifted matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("iteration did not converge")]
    NoConvergence,
    #[error("invalid Sturm-Liouville problem: {0}")]
    InvalidProblem(String),
    #[error("grid too coarse: mode {mode} needs more than {interior} interior nodes")]
    GridTooCoarse { mode: usize, interior: usize },
    #[error("adaptive step underflow at s = {at}")]
    StiffIntegration { at: f64 },
    #[error("solution escaped the overflow guard at s = {at}")]
    BlowUp { at: f64 },
}
