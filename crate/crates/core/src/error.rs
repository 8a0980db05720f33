use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("record `{id}` (line {line}): {message}")]
    InvalidDocument {
        id: String,
        line: usize,
        message: String,
    },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("invalid summary: {0}")]
    InvalidSummary(String),

    #[error("invalid compression spans: {0}")]
    InvalidSpans(String),

    #[error("sentence {sentence} has {count} compression spans, cap is {cap}")]
    TooManySpans {
        sentence: usize,
        count: usize,
        cap: usize,
    },

    #[error("overlap state: {0}")]
    OverlapUnderflow(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("labels do not match document `{id}`: {message}")]
    LabelMismatch { id: String, message: String },

    #[error("non-finite loss on document `{0}`")]
    NonFiniteLoss(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("inputs are not aligned: {0}")]
    Misaligned(String),

    #[error("duplicate system name `{0}`")]
    DuplicateSystem(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than internal failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::NonFiniteLoss(_) | Error::OverlapUnderflow(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
