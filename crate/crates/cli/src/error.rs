// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a rejected configuration.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for a numerical failure (non-convergence, lost unitarity, ...).
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit status for filesystem errors.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(transmon_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<transmon_core::Error> for CliError {
    fn from(e: transmon_core::Error) -> Self {
        use transmon_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::IndexOutOfRange { .. } | E::Spectrum(_) => {
                CliError::Validation(e.to_string())
            }
            E::SweepPoint { ref source, .. }
                if matches!(**source, E::InvalidParameter(_) | E::IndexOutOfRange { .. }) =>
            {
                CliError::Validation(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
