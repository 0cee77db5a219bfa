use thiserror::Error;

/// Errors raised by the bound calculators and their front-ends.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation
    /// (negative photon number, unphysical covariance, infeasible intrusion pair).
    #[error("domain error: {0}")]
    Domain(String),

    /// A malformed argument: bad index, dimension mismatch, empty grid, missing data.
    #[error("argument error: {0}")]
    Argument(String),

    /// A numerical routine failed (non-convergent eigensolve, step underflow).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
