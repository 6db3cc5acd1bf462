use thiserror::Error;

/// Errors raised while configuring or running the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeesError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The objective returned NaN or an infinity.
    #[error("objective returned a non-finite value ({value})")]
    EvaluationFailure { value: f64 },

    /// The covariance factor lost rank numerically.
    #[error("covariance factor is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("argument outside the domain: {0}")]
    Domain(String),
}

pub type Result<T, E = HeesError> = std::result::Result<T, E>;
