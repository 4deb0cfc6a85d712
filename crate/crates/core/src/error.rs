use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("qubit has no noise source attached")]
    MissingSource,

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("no zeros of the dephasing function: coupling is weak (g cos(theta) = {coupling}, gamma = {gamma})")]
    NoZeros { coupling: f64, gamma: f64 },

    #[error("analytic relaxation function is degenerate (alpha = {alpha}, r = {r})")]
    DegenerateState { alpha: f64, r: f64 },

    #[error("time grid too coarse: spacing {spacing} exceeds limit {limit} ({what})")]
    GridTooCoarse { spacing: f64, limit: f64, what: &'static str },

    #[error("time grid invalid: {0}")]
    InvalidGrid(String),

    #[error("grid time {time} lies outside the trajectory horizon {horizon}")]
    OutsideHorizon { time: f64, horizon: f64 },

    #[error("classification inconclusive: horizon {horizon} shorter than required {required}")]
    Inconclusive { horizon: f64, required: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
