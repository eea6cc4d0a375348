use thiserror::Error;

/// Errors produced by the state, measure, channel and verification layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Kraus family is not complete: residual {0:e}")]
    Completeness(f64),

    #[error("matrix is not an isometry: residual {0:e}")]
    NotIsometry(f64),

    #[error("matrix is not unitary: residual {0:e}")]
    NotUnitary(f64),

    #[error("unknown measure id `{0}`")]
    UnknownMeasure(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
