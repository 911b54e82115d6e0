use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A factor `1 − m·u^a` that has no inverse in the working grading.
    #[error("not invertible in the working grading: {0}")]
    NotInvertible(String),

    /// An intermediate partition sum is bounded neither by the Q-grading
    /// nor by a u-degree argument.
    #[error("uncertifiable truncation at gap {gap}: {reason}")]
    Uncertifiable { gap: usize, reason: String },

    #[error("truncation window {got} below required {want}")]
    WindowTooSmall { got: i64, want: i64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
