use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("numerical consistency check failed: {0}")]
    Numerical(String),

    #[error("eigensolver did not converge")]
    Convergence,

    #[error("size guard: N = {n} exceeds {limit} for exhaustive enumeration (override required)")]
    SizeGuard { n: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("sampler could not find a start string with nonzero weight after {0} attempts")]
    NoStart(usize),

    #[error("missing observable: {0}")]
    MissingObservable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
