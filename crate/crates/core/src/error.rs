use thiserror::Error;

/// Errors raised by the set-estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operation was evaluated outside its domain (division by an
    /// interval containing zero, logarithm of a non-positive value, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Operand dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A traced function used an operation that has no relaxation.
    #[error("unsupported operation: {0}")]
    UnsupportedOp(String),

    /// Malformed numeric input (NaN, infinite entries).
    #[error("invalid input: {0}")]
    Input(String),

    /// A query that requires a nonempty set was made on an empty one.
    #[error("set is empty")]
    EmptySet,

    /// Invalid run configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
