use thiserror::Error;

/// Errors raised by graph construction, state preparation and the
/// information computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex index {index} out of range 1..={n}")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(usize),

    #[error("invalid graph parameter: {0}")]
    InvalidGraph(String),

    #[error("graph has no edges; {0} is undefined (use the separable-state formulas)")]
    EdgelessGraph(&'static str),

    #[error("squeeze parameter r = {r} outside the supported range |r| <= {cap}")]
    SqueezeOutOfRange { r: f64, cap: f64 },

    #[error("photon budget {target} unreachable with r <= {r_max}; maximum reachable is {max_reachable}")]
    UnreachablePhotonBudget {
        target: f64,
        r_max: f64,
        max_reachable: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid coefficient vector: {0}")]
    InvalidCoefficients(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("homodyne outcome covariance is singular at these angles; perturb the local-oscillator phases")]
    SingularMoments,

    #[error("the star-graph angle ansatz requires a star graph centred on vertex 1")]
    NotStarGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
