use thiserror::Error;

/// Errors raised by the linear-algebra kernels, the multiplier construction,
/// the steppers and the benchmark system constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A pivot (or singular value) fell below the relative singularity
    /// threshold. For multiplier matrices this means the rows lost rank.
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("Jacobi SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    /// A state left the admissible domain of the system (or produced a
    /// non-finite value).
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in matrix at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
