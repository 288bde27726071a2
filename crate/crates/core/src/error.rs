use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate spectrum: eigenvalue gap {gap:e} below {tolerance:e}")]
    Degenerate { gap: f64, tolerance: f64 },

    #[error("orthogonal conditioning: |<b|a>| = {overlap:e} is not above {tolerance:e}")]
    OrthogonalConditioning { overlap: f64, tolerance: f64 },

    #[error("state is orthogonal to the reference state: |sum_m <m|a>| = {overlap:e}")]
    OrthogonalReference { overlap: f64 },

    #[error("empty ensemble: Monte Carlo averaging needs at least one sample")]
    EmptyEnsemble,

    #[error("zero-probability branch `{branch}` (probability {probability:e})")]
    ZeroProbability { branch: String, probability: f64 },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("meter grid half-width {half_width} does not cover shifted wavepackets (need at least {required})")]
    Aliasing { half_width: f64, required: f64 },

    #[error("invalid binning: {0}")]
    InvalidBinning(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid phase distribution: {0}")]
    InvalidDistribution(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
