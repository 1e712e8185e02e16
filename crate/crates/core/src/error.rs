use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("psi(0) must be exactly 0, got {0}")]
    PsiNotZeroAtOrigin(f64),

    #[error("malformed transform: {0}")]
    MalformedTransform(String),

    #[error("non-finite value {value} at argument {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("fixed-point iteration diverged at iteration {iteration} (residual {residual})")]
    Divergence { iteration: usize, residual: f64 },

    #[error("multiplicity: both paths have an event at t = {0}")]
    Multiplicity(f64),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("no sampler available for {0}")]
    NoSampler(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
