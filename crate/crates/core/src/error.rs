use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the quantity being computed.
    #[error("domain error: {0}")]
    Domain(String),
    /// An exact computation would exceed its configured budget.
    #[error("resource limit: {what} (budget {budget}, progress {progress})")]
    Resource {
        what: String,
        budget: u64,
        progress: u64,
    },
    /// An iterative method failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
