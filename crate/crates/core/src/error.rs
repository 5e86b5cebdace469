use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("antenna {index} at x = {x} lies outside [{lo}, {hi}]")]
    AntennaOutOfRange { index: usize, x: f64, lo: f64, hi: f64 },

    #[error("degenerate channel: {0}")]
    DegenerateChannel(&'static str),

    #[error("phase-rotation equation has no solution (|A| = {magnitude}, |Re B| = {required})")]
    NumericalInfeasibility { magnitude: f64, required: f64 },

    #[error("realized radar SNR {achieved} misses the requirement {required}")]
    RealizationFailure { achieved: f64, required: f64 },

    #[error("SCA objective decreased from {previous} to {current}")]
    NonMonotoneStep { previous: f64, current: f64 },

    #[error("exhaustive search over {antennas} antennas at step {step} m is too expensive")]
    SearchTooExpensive { antennas: usize, step: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("nothing to emit")]
    EmptyResults,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
