use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV data: {0}")]
    Parse(String),
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("input too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid length {0}")]
    InvalidLength(usize),
    #[error("frame is empty")]
    EmptyFrame,
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid cutoff {cutoff_hz} Hz for sample rate {sample_rate_hz} Hz")]
    InvalidCutoff { cutoff_hz: f64, sample_rate_hz: u32 },
    #[error("invalid filter spec: {0}")]
    InvalidFilter(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("cannot stratify: {0}")]
    Stratify(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("manifest row {row}: {message}")]
    Ingest { row: usize, message: String },
    #[error("label: {0}")]
    Label(String),
    #[error("model format: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
