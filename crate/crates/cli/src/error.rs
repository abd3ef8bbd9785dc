use std::path::PathBuf;

use thiserror::Error;

/// Every failure the CLI reports, each tied to one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::Invalid(message.into())
    }

    pub fn exit_code(&self) -> ExitStatus {
        match self {
            CliError::Parse(_) | CliError::Io { .. } => ExitStatus::InputError,
            CliError::Invalid(_) => ExitStatus::Invalid,
        }
    }
}

impl From<esdp_core::Error> for CliError {
    fn from(e: esdp_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// Process exit codes. No other values are ever returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    InputError = 1,
    Invalid = 2,
    Insecure = 3,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}
