use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("outside the domain of this operation: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e} after {subdivisions} subdivisions")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("insufficient exceedances: found {found}, need at least {needed}")]
    InsufficientExceedances { found: usize, needed: usize },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("centering mode mismatch: {0}")]
    Centering(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
