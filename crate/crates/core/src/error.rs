use thiserror::Error;

/// Errors raised by the counting, arithmetic and orbit routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The arguments violate a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured size or work budget would be exceeded.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A numerical iteration did not reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// An internal consistency check failed. Always a bug.
    #[error("invariant broken: {0}")]
    InvariantBroken(String),

    /// A configuration file could not be parsed.
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
