use thiserror::Error;

/// Errors raised by body construction, measure evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 2..=4")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation requires n <= {max}, got n = {got}")]
    DimensionTooLarge { max: usize, got: usize },
    #[error("normals do not positively span the space; the body is unbounded")]
    UnboundedBody,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("generators do not span the space")]
    DegenerateGenerators,
    #[error("density is not homogeneous")]
    NonHomogeneousDensity,
    #[error("density declares no concavity degree or half-space")]
    MissingConcavity,
    #[error("{check} failed: worst deviation {deviation:e} exceeds {tolerance:e}")]
    CheckFailed { check: &'static str, deviation: f64, tolerance: f64 },
    #[error("quantile argument {0} is outside (0, 1)")]
    DomainError(f64),
    #[error("normal {index} is not inside the support cone of the density")]
    NotInSupport { index: usize },
    #[error("face {index} stayed empty for {iterations} consecutive iterations")]
    FaceCollapsed { index: usize, iterations: usize },
    #[error("no convergence after {iterations} iterations (max residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("pair rejected: {0}")]
    RejectedPair(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
