use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input object does not satisfy the invariants the operation relies on.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative routine did not converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Parameters that are individually valid but cannot occur together.
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),

    /// Not enough data to estimate a statistic.
    #[error("estimation error: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
