use thiserror::Error;

/// Errors raised by constructors and operations of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent p = {0} must exceed 1")]
    ExponentTooSmall(f64),

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("candidate integrand fails the {property} check at {witness:?}")]
    NotAGFunction {
        property: &'static str,
        witness: Vec<f64>,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("trajectory needs at least 4 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("period must be positive and finite, got {0}")]
    InvalidPeriod(f64),

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("conjugate is infinite at {0:?}")]
    InfiniteConjugate(Vec<f64>),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("nonsmooth term {term} has negative time coefficient {value} at t = {t}")]
    NegativeNonsmoothCoefficient { term: usize, t: f64, value: f64 },

    #[error("projection onto subdifferential did not converge after {iterations} iterations (last step {last_step:e})")]
    ProjectionDiverged { iterations: usize, last_step: f64 },

    #[error("time expression: {0}")]
    TimeExpr(String),

    #[error("trajectory csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
