use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Edge list is not a tree, degrees are wrong, sizes disagree.
    #[error("structural error: {0}")]
    Structural(String),
    /// Non-finite values or inconsistent numeric input.
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
