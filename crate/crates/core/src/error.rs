use thiserror::Error;

/// Errors raised by learners, environments and the regret ledger.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Internal state reached a configuration the algorithm cannot continue from.
    #[error("degenerate state: {0}")]
    DegenerateState(String),
    /// An iterative solver failed to converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
