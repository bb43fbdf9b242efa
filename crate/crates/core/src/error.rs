use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed header in {}: {reason}", .path.display())]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("malformed manifest {}: {reason}", .path.display())]
    MalformedManifest { path: PathBuf, reason: String },

    #[error("ragged row {row} in {}: expected {expected} values, found {found}", .path.display())]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite sample at row {row}, channel {channel} in {}", .path.display())]
    NonFiniteSample {
        path: PathBuf,
        row: usize,
        channel: String,
    },

    #[error("duplicate channel label {0:?}")]
    DuplicateLabel(String),

    #[error("channel label {0:?} is not part of the standard 10/20 montage")]
    UnknownMontageLabel(String),

    #[error("split error for subject {subject:?}: {reason}")]
    Split { subject: String, reason: String },

    #[error("degenerate segment: total 1-30 Hz power is zero")]
    DegenerateSegment,

    #[error("channel {channel}, segment {segment}: {source}")]
    Featurize {
        channel: String,
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("degenerate training set: {0}")]
    DegenerateTraining(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{arm} arm: {source}")]
    Arm {
        arm: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
