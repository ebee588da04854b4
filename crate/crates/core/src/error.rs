use thiserror::Error;

/// Errors raised by every layer of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (smallest eigenvalue {min:e}, largest {max:e})")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("matrix is not symmetric: entries ({i},{j}) differ by {diff:e}")]
    AsymmetricInput { i: usize, j: usize, diff: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported dimension {n} (supported: 1..={max})")]
    UnsupportedDimension { n: usize, max: usize },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("time {t} exceeds the horizon T = {horizon}")]
    TimeBeyondHorizon { t: f64, horizon: f64 },

    #[error("integral diverges: time exponent {exponent} >= 1 (requires p > n + 2)")]
    DivergentIntegral { exponent: f64 },

    #[error("quadrature did not reach the target: error estimate {estimate:e} > {target:e}")]
    QuadratureFailure { estimate: f64, target: f64 },

    #[error("invalid Lebesgue exponent p = {0} (must lie in [1, inf])")]
    InvalidExponent(f64),

    #[error("exponent p = {p} too small for the nonhomogeneous bound in dimension {n} (need p > {})", n + 2)]
    ExponentTooSmall { p: f64, n: usize },

    #[error("direction is not a unit vector (|l| = {0})")]
    InvalidDirection(f64),

    #[error("unsupported data: {0}")]
    UnsupportedData(String),

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("malformed grid file: {0}")]
    GridFormat(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
