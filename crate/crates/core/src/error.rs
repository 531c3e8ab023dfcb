use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input violates a documented contract (shape, finiteness, distinctness).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An underlying factorization failed to converge or produced an
    /// inconsistent result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The operation was called before its preconditions could hold,
    /// e.g. asking for a certificate at step 0.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
