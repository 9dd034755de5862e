use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid zero {value}: zeros must satisfy 0 < |z| < 1")]
    InvalidZero { value: Complex64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("sampling failure: {0}")]
    Sampling(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root finder did not converge after {iterations} iterations: {message}")]
    NoConvergence {
        iterations: usize,
        message: String,
        /// Best estimates available when the solver gave up.
        partial: Vec<Complex64>,
    },

    #[error("critical point count mismatch: found {found}, expected {expected}, winding {winding:?}")]
    CountMismatch {
        found: usize,
        expected: usize,
        winding: Option<i64>,
    },

    #[error("inconclusive contour at r = {radius}: {message}")]
    InconclusiveContour { radius: f64, message: String },

    #[error("quadrature resolution error: {0}")]
    Resolution(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
