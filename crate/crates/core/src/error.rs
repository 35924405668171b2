//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The parameter combination is valid in principle but not supported.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative evaluation hit its subdivision/iteration limit before
    /// reaching the requested tolerance.
    #[error("failed to converge: {0}")]
    NonConvergence(String),

    /// Result would exceed the representable range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A configuration struct violates one of its invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
