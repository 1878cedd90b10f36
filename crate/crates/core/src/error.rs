use thiserror::Error;

/// Errors raised by code construction, decoding and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration-model sampling failed after {attempts} attempts")]
    SamplingFailed { attempts: usize },

    #[error("residual has nonzero stabilizer syndrome")]
    NonzeroSyndrome,

    #[error("no crossing found in the supplied grid")]
    NoCrossing,

    #[error("fit needs at least two points with nonzero failure rate")]
    DegenerateFit,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
