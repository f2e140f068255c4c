use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("round index must satisfy 1 <= t, got {0}")]
    InvalidRound(usize),

    #[error("c outside [1/2, 1)")]
    COutOfRange,

    #[error("epsilon must be positive")]
    NonPositiveEpsilon,

    #[error("delta must be positive")]
    NonPositiveDelta,

    #[error("xi outside (0, 1)")]
    XiOutOfRange,

    #[error("perturbation exceeds shrinkage margin")]
    PerturbationTooLarge,

    #[error("sigma required and positive in strongly convex mode")]
    MissingSigma,

    #[error("loss oracle returned a non-finite value at round {round}")]
    NonFiniteLoss { round: usize },

    #[error("non-finite input in {0}")]
    NonFiniteInput(&'static str),

    #[error("solver did not converge: certified gap {gap:.3e} > tol {tol:.3e} after {iterations} iterations")]
    Unconverged {
        gap: f64,
        tol: f64,
        iterations: usize,
        best: Vec<f64>,
    },

    #[error("empty probe list")]
    EmptyProbes,

    #[error("sample count must be at least 1")]
    ZeroSamples,

    #[error("offline problem is infeasible: best achievable max_t g_t = {residual:.3e}")]
    Infeasible { residual: f64 },

    #[error("full-information loss oracle required but absent")]
    MissingFullInfo,

    #[error("comparator x_star required to compute regret")]
    MissingComparator,

    #[error("growth fit needs at least 3 positive points with distinct horizons")]
    BadFitInput,

    #[error("trace and instance horizons differ: {trace} vs {instance}")]
    HorizonMismatch { trace: usize, instance: usize },

    #[error("invalid suite: {0}")]
    InvalidSuite(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("trace file schema mismatch in {path}: {detail}")]
    TraceSchema { path: String, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
