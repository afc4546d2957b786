use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the machine, the distillation pipelines and the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("empty vocabulary: the training corpus produced no terms")]
    EmptyVocabulary,

    #[error("bad magic number in {0}")]
    BadMagic(&'static str),

    #[error("truncated {0}")]
    Truncated(&'static str),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),

    #[error("automaton depth {0} does not fit the byte-per-state model format (max 127)")]
    StateOverflow(u16),

    #[error("corrupt data: {0}")]
    Corrupt(String),

    #[error("record count mismatch: {images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for configuration problems (invalid parameters or experiment config).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParams(_) | Error::Json(_))
    }

    /// True for problems with input data or artifact files.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension { .. }
                | Error::LabelOutOfRange { .. }
                | Error::NonFinite { .. }
                | Error::EmptyInput(_)
                | Error::EmptyVocabulary
                | Error::BadMagic(_)
                | Error::Truncated(_)
                | Error::UnsupportedVersion(_)
                | Error::StateOverflow(_)
                | Error::Corrupt(_)
                | Error::CountMismatch { .. }
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
