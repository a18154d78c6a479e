use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by failure class rather than by module so callers can
/// match on what went wrong (bad file, bad parameter, degenerate data)
/// without caring where in the pipeline it happened. Pipeline stages wrap
/// their errors in [`Error::Stage`] so the stage name survives propagation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed WAV file {path}: {detail}")]
    WavFormat { path: PathBuf, detail: String },

    #[error("unsupported WAV encoding in {path}: {encoding}")]
    UnsupportedEncoding { path: PathBuf, encoding: String },

    #[error("CSV error in {path} at line {line}: {detail}")]
    Csv {
        path: PathBuf,
        line: u64,
        detail: String,
    },

    #[error("invalid parameter {name}: {detail}")]
    Parameter { name: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            detail: detail.into(),
        }
    }

    /// Adapter for `map_err`: wraps an error with the pipeline stage it
    /// occurred in.
    pub(crate) fn in_stage(stage: &'static str) -> impl Fn(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
