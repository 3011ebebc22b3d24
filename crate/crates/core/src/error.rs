use thiserror::Error;

/// Errors raised by the parfam core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("denominator coefficients are all zero")]
    ZeroDenominator,

    #[error("non-finite model output at row {row}")]
    NonFinite { row: usize },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("malformed data at line {line}: {msg}")]
    Data { line: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("search produced no finite candidate: {0}")]
    NoCandidate(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
