use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] concordance::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Input { line: u64, message: String },

    #[error("invalid argument: {0}")]
    Usage(String),

    #[error("cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 input, 3 capacity, 4 degenerate statistic.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(concordance::Error::Capacity(_)) => 3,
            CliError::Core(concordance::Error::Degenerate(_)) => 4,
            CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
