//! CLI errors.

use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] eclosure_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Stdout(#[from] io::Error),
}

impl CliError {
    pub fn parse(line: u64, message: impl Into<String>) -> Self {
        CliError::Parse { line, message: message.into() }
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
