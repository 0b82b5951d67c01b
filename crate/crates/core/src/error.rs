use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("index {index} out of range [{lo}, {hi}]")]
    OutOfRange { index: i64, lo: i64, hi: i64 },

    #[error("permutation of length {len} exceeds expansion bound {bound}")]
    Truncation { len: usize, bound: usize },

    #[error("pattern length {len} exceeds supported maximum {max}")]
    PatternTooLong { len: usize, max: usize },

    #[error("unknown statistic `{name}`; known: {known}")]
    UnknownStatistic { name: String, known: String },

    #[error("right-to-left maxima class violates |M| = |I| and n in M and I: {0}")]
    InvalidClass(String),
}

pub type Result<T> = std::result::Result<T, Error>;
