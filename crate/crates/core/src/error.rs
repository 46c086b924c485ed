use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sample rate {0} Hz cannot represent the 8 kHz octave band")]
    SampleRateTooLow(f64),

    #[error("frame is silent (RMS = 0)")]
    Silence,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("band index {0} outside 1..=7")]
    BandIndex(usize),

    #[error("position ({x:.2}, {y:.2}) is outside the scene extent")]
    OutOfBounds { x: f64, y: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("no spreading factor closes the link at {distance_m:.1} m")]
    InfeasibleLink { distance_m: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("scenario generation exhausted {attempts} attempts with {accepted} events accepted")]
    RejectionExhausted { attempts: usize, accepted: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
