use thiserror::Error;

/// Failures raised by grid, transform and decomposition routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("profile `{profile}` does not support {what}")]
    UnsupportedProfile { profile: String, what: String },

    #[error("singular point: {0}")]
    Singular(String),

    #[error("accuracy: {0}")]
    Accuracy(String),

    #[error("candidate {index} is numerically dependent (residual norm {residual:.3e})")]
    Rank { index: usize, residual: f64 },

    #[error("capacity exceeded: {requested} items for {available} slots")]
    Capacity { requested: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
