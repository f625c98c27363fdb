use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]: {reason}")]
    InvalidInterval { lo: f64, hi: f64, reason: &'static str },

    #[error("invalid tolerance interval [{lo}, {hi}]: need 0 <= lo <= hi")]
    InvalidEpsilon { lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("problem file error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("lower objective {lo} exceeds upper objective {hi} at {point:?}")]
    LowerExceedsUpper { point: Vec<f64>, lo: f64, hi: f64 },

    #[error("conjugate unavailable for this expression; use the sampled refutation check")]
    ConjugateUnavailable,

    #[error("expression is not certified convex: {0}")]
    NotConvex(String),

    #[error("epsilon-subdifferential of {0} has no closed-form set for projection")]
    UnsupportedAtomForMembership(String),

    #[error("multiplier must be positive, got {0}")]
    NonPositiveMultiplier(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point is infeasible: max constraint value {max_violation}")]
    Infeasible { max_violation: f64 },

    #[error("tolerance interval hypothesis violated: {0}")]
    EpsilonHypothesis(&'static str),

    #[error("sample set is empty")]
    EmptySample,

    #[error("function is not smooth at the point ({0}); supply an explicit witness")]
    NonSmoothAtPoint(String),

    #[error("strict convexity of both objective bounds is not certified")]
    StrictConvexityNotCertified,

    #[error("closedness condition must be asserted (--assume-cc)")]
    CcNotAsserted,

    #[error("no feasible point found within the iteration budget")]
    NoFeasiblePointFound,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
