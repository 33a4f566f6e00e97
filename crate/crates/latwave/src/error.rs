use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad parameters: wrong dimension, out-of-range values, malformed input.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// The request is well-formed but would exceed a memory or time budget.
    #[error("cost guard: {0}")]
    CostGuard(String),
    /// Evaluation at a point where the requested quantity is undefined.
    #[error("singular point: {0}")]
    Singular(String),
    #[error("did not converge: {0}")]
    NonConvergent(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
