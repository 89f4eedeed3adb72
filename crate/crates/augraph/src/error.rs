use thiserror::Error;

/// Errors surfaced by graph construction, spectral routines, trainers,
/// probes, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input is not stochastic: {0}")]
    NonStochasticInput(String),

    #[error("degenerate graph: fewer than 2 vertices survive pruning")]
    DegenerateGraph,

    #[error("vertex {0} has zero weight after construction")]
    ZeroDegree(usize),

    #[error("requested dimension {k} exceeds vertex count {n}")]
    DimensionTooLarge { k: usize, n: usize },

    #[error("eigensolver failed to converge")]
    ConvergenceFailure,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("eigenvalue {index} is negative ({value:.3e}); FF^T cannot express it")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("training diverged at step {step} (loss {loss:.3e})")]
    Divergence { step: usize, loss: f64 },

    #[error("graph has no vertex payloads; parametric training needs coordinates")]
    MissingPayload,

    #[error("unknown natural id: {0}")]
    UnknownNatural(String),

    #[error("transform matrix Q is singular or near-singular (cond {0:.3e})")]
    SingularQ(f64),

    #[error("embedding matrix is rank-deficient (smallest singular value {0:.3e})")]
    RankDeficient(f64),

    #[error("spectral gap is zero: lambda_{0} = 0")]
    ZeroSpectralGap(usize),

    #[error("conductance of an empty vertex set is undefined")]
    EmptySet,

    #[error("graph too large for exact partition enumeration: N={n} > cap {cap}")]
    TooLargeForExact { n: usize, cap: usize },

    #[error("Rayleigh quotient of the zero vector is undefined")]
    ZeroVector,

    #[error("rho must be positive for the bound shape")]
    ZeroRho,

    #[error("epsilon {eps:.3e} is not below the required (1-lambda_k)^2 = {limit:.3e}")]
    EpsilonTooLarge { eps: f64, limit: f64 },

    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    #[error("invariant violated on load: {0}")]
    InvariantViolation(String),

    #[error("degenerate discretization: {0}")]
    DegenerateDiscretization(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
