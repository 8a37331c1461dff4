use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] conetri_core::Error),

    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}
