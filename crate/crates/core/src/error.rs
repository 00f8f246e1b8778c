use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A partial quotient beyond the available prefix was requested.
    #[error("continued fraction exhausted: quotient {requested} requested, only {available} available")]
    DepthExhausted { requested: usize, available: usize },

    #[error("index ({m},{n}) out of range: n must not exceed {limit}")]
    IndexOutOfRange { m: usize, n: u64, limit: u64 },

    #[error("invalid continued fraction: {0}")]
    InvalidContinuedFraction(String),

    #[error("operands live over different irrationals")]
    MixedLambda,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A point lies within the guard tolerance of a cone boundary and strict mode is on.
    #[error("precision-ambiguous: {0}")]
    PrecisionAmbiguous(String),

    /// A point lies within the guard tolerance of an atom or threshold boundary.
    #[error("boundary-ambiguous: {0}")]
    BoundaryAmbiguous(String),

    #[error("iteration budget of {0} steps exceeded")]
    IterationBudgetExceeded(u64),

    #[error("index ({m},{n}) lies below the return-time threshold ({m0},{n0})")]
    IndexBelowThreshold { m: usize, n: u64, m0: usize, n0: u64 },

    #[error("point not in the domain: {0}")]
    NotInDomain(String),

    #[error("point is not periodic: {0}")]
    NotPeriodic(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
