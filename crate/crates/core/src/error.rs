use thiserror::Error;

/// Errors produced by the estimation, analysis and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("singular least-squares system ({rows}x{cols}, condition ratio {ratio:e})")]
    SingularSystem { rows: usize, cols: usize, ratio: f64 },

    #[error("support of size {support} exceeds the {measurements} available measurements")]
    SupportTooLarge { support: usize, measurements: usize },

    #[error("reference vector has zero norm")]
    ZeroNorm,

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
