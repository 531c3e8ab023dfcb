use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A config field is missing, mistyped or out of range.
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    /// A data file parsed but one of its cells is unusable.
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: u64, column: usize, message: String },

    #[error(transparent)]
    Core(#[from] regcert_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for I/O failures, 1 for everything the user can fix in the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
