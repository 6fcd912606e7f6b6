use thiserror::Error;

/// Failure classes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed input data or an unknown identifier.
    #[error("input error: {0}")]
    Input(String),
    /// A configured size guard was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// The instance is outside the regime a solver supports.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A signal with zero marginal probability was queried.
    #[error("unreachable signal: {0}")]
    UnreachableSignal(String),
    /// A mathematical invariant did not hold; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
