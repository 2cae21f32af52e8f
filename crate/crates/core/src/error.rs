use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Zero or constant polynomial where a nonconstant one is needed.
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An internal consistency check failed; always a bug.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("domain error: {0}")]
    Domain(String),
    /// A memory or work budget was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
