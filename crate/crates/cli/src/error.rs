use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_REFUSED: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Engine(#[from] pathsum_core::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("json encoding: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 when the engine declines work it could in principle do (too many
    /// paths, too large a matrix, overflowing weights); 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use pathsum_core::Error as E;
        match self {
            CliError::Engine(
                E::CapExceeded { .. } | E::BudgetExceeded { .. } | E::NonFinite(_),
            ) => EXIT_REFUSED,
            _ => EXIT_CONFIG,
        }
    }
}
