use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid N-function: {0}")]
    InvalidNFunction(String),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("element is not Hermitian (asymmetry {asymmetry:.3e}, tolerance {tolerance:.3e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("element is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("weight is singular or ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("root finding failed: {0}")]
    NoConvergence(String),

    #[error("malformed input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
