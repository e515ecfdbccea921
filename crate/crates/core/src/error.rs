use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("vocabulary error: token id {id} at position {position} is outside vocabulary of size {vocab_size}")]
    Vocabulary {
        id: usize,
        position: usize,
        vocab_size: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("empty batch: {0}")]
    EmptyBatch(String),

    #[error("annotation error: {0}")]
    Annotation(String),

    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: u64, expected: u64 },

    #[error("malformed checkpoint: {0}")]
    CheckpointMalformed(String),

    #[error("checkpoint tensor `{tensor}` has shape {found:?}, expected {expected:?}")]
    CheckpointShape {
        tensor: String,
        found: Vec<usize>,
        expected: Vec<usize>,
    },

    #[error("undefined probe: {0}")]
    UndefinedProbe(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("compatibility error: {0}")]
    Compatibility(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("training aborted at epoch {epoch}, batch {batch} ({task}): {source}")]
    TrainingAborted {
        epoch: usize,
        batch: usize,
        task: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Process exit code: 2 configuration, 3 data, 4 numeric abort.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Range(_) => 2,
            Error::Numeric(_) => 4,
            Error::TrainingAborted { source, .. } => match source.as_ref() {
                Error::Numeric(_) => 4,
                other => other.exit_code(),
            },
            _ => 3,
        }
    }
}
