use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, an unreadable or invalid config file, or inconsistent values.
    #[error("{0}")]
    Validation(String),

    /// `verify` ran to completion but at least one check failed.
    #[error("verification failed: {0}")]
    Verification(String),

    /// The integrator gave up (boundary trip, step underflow, non-finite state).
    #[error("integration failed: {0}")]
    Integration(rpsflow_core::Error),

    #[error("cannot {action} {}: {source}", path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Integration(_) | CliError::Io { .. } => 3,
        }
    }

    pub(crate) fn io(action: &'static str, path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            action,
            path: path.to_path_buf(),
            source,
        }
    }

    /// Prefixes parameter errors with the config section they came from, so
    /// that messages name the exact field (`integrator.t_end`, ...).
    pub(crate) fn in_section(section: &str, err: rpsflow_core::Error) -> Self {
        match err {
            rpsflow_core::Error::InvalidParam { field, reason } => {
                CliError::Validation(format!("{section}.{field}: {reason}"))
            }
            other => other.into(),
        }
    }
}

impl From<rpsflow_core::Error> for CliError {
    fn from(err: rpsflow_core::Error) -> Self {
        if err.is_integration_failure() {
            CliError::Integration(err)
        } else {
            CliError::Validation(err.to_string())
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
