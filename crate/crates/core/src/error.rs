use thiserror::Error;

/// Errors raised by the numerical kernels and the slice machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max asymmetry {asymmetry:.3e}")]
    NotHermitian { asymmetry: f64 },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not a projection: {0}")]
    NotProjection(String),

    #[error("point is not in the elliptope (min eigenvalue {min_eig:.3e})")]
    NotInElliptope { min_eig: f64 },

    #[error("marginal vector is not standard: {0:?}")]
    NotStandard([f64; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("reduction precondition violated: {0}")]
    Precondition(String),

    #[error("witness does not certify the target: {0}")]
    BadWitness(String),

    #[error("certificate is not a membership certificate")]
    NotMembership,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
