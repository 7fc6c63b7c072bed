use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state has dimension {got}, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration produced a non-finite state at step {step}")]
    Divergence { step: usize },

    #[error("series of length {len} is too short: at least {required} samples required")]
    SeriesTooShort { len: usize, required: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("sweep needs at least 2 successful parameter values, got {0}")]
    TooFewValues(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
