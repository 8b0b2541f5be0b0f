//! Numerical building blocks shared across the workspace: the generalized
//! symmetric eigensolver used for bridge and harvester modal analysis, a
//! banded Cholesky for implicit time stepping, Gauss–Legendre rules, and a
//! few one-dimensional utilities.

pub mod band;
pub mod eigen;
pub mod interp;
pub mod ode;
pub mod optimize;
pub mod quadrature;
pub mod stats;

pub use band::SymBandMatrix;
pub use eigen::{generalized_eigen, GeneralizedEigen};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NumericsError {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("eigen-solver did not converge after {iterations} sweeps (n = {dim})")]
    EigenNonConvergence { iterations: usize, dim: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("search failed: {0}")]
    SearchFailed(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;
