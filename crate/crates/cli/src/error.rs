use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: row {row}: {message}")]
    Parse { file: String, row: usize, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hopf_tda::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("sweep failed at noise level {noise}: {reason}; partial outputs in {dir}")]
    SweepFailed { noise: f64, reason: String, dir: PathBuf },
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
