//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Solver or schedule configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    Configuration(String),

    /// The requested quantity is undefined for this input (for example a
    /// diameter of an unbounded set).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An oracle produced NaN or infinity; the run is aborted so the
    /// poisoned state never reaches the trace.
    #[error("non-finite value from {source_name} at epoch {epoch}, agent {agent}")]
    NonFinite {
        source_name: &'static str,
        epoch: usize,
        agent: usize,
    },
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn configuration(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
