use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid grid function: {0}")]
    InvalidGridFn(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("NaN coordinate in query point")]
    NanCoordinate,

    #[error("function has no finite value (empty effective domain)")]
    EmptyDomain,

    #[error("input is not sorted strictly increasing: {0}")]
    Unsorted(&'static str),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),

    #[error("algorithm {algorithm} is not applicable: {reason}")]
    Unsupported { algorithm: String, reason: String },

    #[error("grid Z does not cover the state-dynamics image in dimension {dim}")]
    ZNotCovering { dim: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
