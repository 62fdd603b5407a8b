use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the analysis pipeline. Each variant names the stage that
/// produced it so the CLI can attribute failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sim: {0}")]
    Simulation(String),

    #[error("observables: {0}")]
    Observables(String),

    #[error("manifold: {0}")]
    Manifold(String),

    #[error("segment: {0}")]
    Segment(String),

    #[error("dataset: {0}")]
    Dataset(String),

    #[error("config: key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
