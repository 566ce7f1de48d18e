use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line search did not converge in {iterations} bisections (best s = {best_s})")]
    LineSearch { iterations: usize, best_s: f64 },

    #[error("Lanczos breakdown at iteration {0}: p^T A p <= 0")]
    Breakdown(usize),

    #[error("secular equation did not converge in {0} iterations")]
    SecularNonConvergence(usize),

    #[error("hard case of the trust-region subproblem is not supported")]
    HardCase,

    #[error("incompatible: {0}")]
    Incompatible(String),

    #[error("subspace minimization failed: {0}")]
    Subspace(String),
}
