use thiserror::Error;

/// Errors raised across the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A size limit of an exact or enumerative routine was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// Malformed text input.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    /// A numerical routine did not converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A splitting rule that puts all mass on separating the last leaf.
    #[error("singular rule: {0}")]
    Singular(String),
    /// A state object violates its invariants.
    #[error("invalid state: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
