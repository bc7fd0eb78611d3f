use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("{file}:{line}: {message}")]
    Syntax { file: String, line: u32, message: String },

    #[error("{path}:{line}: {message}")]
    Catalog { path: String, line: usize, message: String },

    #[error("malformed xml in {path}: {message}")]
    Xml { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown output format `{0}`")]
    UnknownFormat(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad user input (exit code 1) as opposed to
    /// internal failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Json(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A non-fatal problem recorded during a scan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub stage: String,
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(stage: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            stage: stage.to_string(),
            location: location.into(),
            message: message.into(),
        }
    }
}
