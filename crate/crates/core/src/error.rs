use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid digit {ch:?} at position {position}")]
    InvalidDigit { position: usize, ch: char },
    #[error("domino strings must be nonempty")]
    EmptyString,
    #[error("instance has no dominoes")]
    EmptyInstance,
    #[error("arrangement is empty")]
    EmptyArrangement,
    #[error("domino index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("probability {value} outside the open interval (0, 1/2)")]
    Domain { value: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("unknown statement {0:?}")]
    UnknownStatement(String),
    #[error("index map: {0}")]
    IndexMap(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
