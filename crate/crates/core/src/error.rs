use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lattice size {0} is not prime")]
    NotPrime(u64),

    #[error("{what}: predicted size {predicted} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        predicted: u128,
        cap: u128,
    },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
