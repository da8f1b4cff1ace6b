use thiserror::Error;

/// Errors raised by the statistics engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Arrangement, matrix or permutation shapes do not agree.
    #[error("structural mismatch: {0}")]
    Structure(String),

    /// The requested computation exceeds a size limit (DP width, k!, multinomial budget).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The statistic is undefined or vacuous for the given input.
    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
