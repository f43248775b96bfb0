use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{what} is outside its domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("no convergence after {iterations} iterations on interval [{lo}, {hi}]")]
    NotConverged { lo: f64, hi: f64, iterations: usize },

    #[error("dense oracle is limited to n <= {max}, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("vector is not normalized: norm = {0}")]
    NotNormalized(f64),

    #[error("zero coefficient vector")]
    ZeroVector,

    #[error("too few usable points for a fit: {got} (need {need})")]
    TooFewPoints { got: usize, need: usize },

    #[error("no mobility edge found: {0}")]
    NoEdge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
