use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Optimizer(#[from] hees::HeesError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("unknown trace field '{0}' (expected distance, cond_c, sigma or best_f)")]
    UnknownField(String),

    #[error("nothing to aggregate: {0}")]
    Empty(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
