use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("solver failed to converge after {iterations} iterations (relative residual {residual:e})")]
    SolverFailure { iterations: usize, residual: f64 },
    #[error("invalid flow: {0}")]
    InvalidFlow(String),
    #[error("missing dependency: {0}")]
    Dependency(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, LrpError>;

pub(crate) fn invalid(msg: impl Into<String>) -> LrpError {
    LrpError::InvalidArgument(msg.into())
}
