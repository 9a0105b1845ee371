use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric failure in layer {layer}: {detail}")]
    NumericLayer { layer: usize, detail: String },

    #[error("numeric failure at step {step}: {detail}")]
    NumericStep { step: u64, detail: String },

    #[error("training aborted at epoch {epoch}, step {step}: {source}")]
    Training {
        epoch: usize,
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("sequencing error: {0}")]
    Sequencing(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("undefined metric: {0}")]
    Undefined(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by non-finite values during training.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NumericLayer { .. } | Error::NumericStep { .. } => true,
            Error::Training { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
