use thiserror::Error;

#[derive(Debug, Error)]
pub enum FdError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("inverse iteration stalled after {iterations} solves (change {change:e}, residual {residual:e})")]
    NotConverged { iterations: usize, change: f64, residual: f64 },

    #[error("null vector changes sign (min/max = {ratio:e})")]
    SignChange { ratio: f64 },

    #[error(transparent)]
    Core(#[from] mmq_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FdError>;
