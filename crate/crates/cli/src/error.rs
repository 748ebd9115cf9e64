use std::path::PathBuf;

use thiserror::Error;

/// CLI failure, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numeric error: {0}")]
    Numeric(drosc_core::Error),

    #[error("Fock truncation error: {0}")]
    Truncation(drosc_core::Error),

    #[error("verification failed: {0}")]
    ToleranceExceeded(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config, 3 numeric, 4 truncation, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::ToleranceExceeded(_) => 3,
            CliError::Truncation(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<drosc_core::Error> for CliError {
    fn from(e: drosc_core::Error) -> Self {
        match e {
            drosc_core::Error::TruncationTooSmall { .. } => CliError::Truncation(e),
            other => CliError::Numeric(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
