//! Error type shared by all modules.

/// Failure modes of the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A configuration violates a structural invariant.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// An operation was called outside its domain of validity.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Vector or matrix dimensions do not match the configuration.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// An iterative or quadrature routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
