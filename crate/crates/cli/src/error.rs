use std::io;
use std::path::Path;

use thiserror::Error;

/// Failure classes, each with a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::MissingInput(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    pub fn validation(detail: impl std::fmt::Display) -> Self {
        CliError::Validation(detail.to_string())
    }

    /// Classifies an I/O error on `path`: not-found is a missing input.
    pub fn from_io(path: &Path, e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::NotFound {
            CliError::MissingInput(path.display().to_string())
        } else {
            CliError::Io(format!("{}: {e}", path.display()))
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
