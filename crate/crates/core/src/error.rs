use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("point {t} outside domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },
    #[error("matrix not positive definite (largest jitter tried: {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },
    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },
    #[error("heat solver produced non-finite values at time step {step}")]
    SolverDiverged { step: usize },
    #[error("non-finite potential: {0}")]
    NonFinitePotential(String),
    #[error("series has zero variance (stuck chain)")]
    ZeroVariance,
    #[error("not enough samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
