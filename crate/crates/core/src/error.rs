use thiserror::Error;

/// A broken clique-cover invariant. Variable and clique numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverViolation {
    #[error("ambient dimension must be positive")]
    ZeroDimension,
    #[error("cover has no cliques")]
    NoCliques,
    #[error("clique {clique} is empty")]
    EmptyClique { clique: usize },
    #[error("clique {clique} is not strictly increasing")]
    NotSorted { clique: usize },
    #[error("clique {clique} mentions variable {variable} outside 1..={n}")]
    OutOfRange {
        clique: usize,
        variable: usize,
        n: usize,
    },
    #[error("clique {inner} is contained in clique {outer}")]
    Nested { inner: usize, outer: usize },
    #[error("variable {variable} is not covered by any clique")]
    Uncovered { variable: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid clique cover: {0}")]
    InvalidCover(#[from] CoverViolation),

    #[error("multi-index {alpha:?} is not correlatively sparse of degree <= {bound}")]
    IndexOutOfPattern { alpha: Vec<u32>, bound: u32 },

    #[error("duplicate moment entry for {alpha:?}")]
    DuplicateEntry { alpha: Vec<u32> },

    #[error("missing moment entry for {alpha:?}")]
    MissingEntry { alpha: Vec<u32> },

    #[error("multi-index {alpha:?} has length {got}, expected {expected}")]
    WrongArity {
        alpha: Vec<u32>,
        got: usize,
        expected: usize,
    },

    #[error("order {order} needs moments of degree {needed} but only {available} are stored")]
    OrderTooHigh {
        order: u32,
        needed: u32,
        available: u32,
    },

    #[error("localizing order {order} is below the constraint half-degree {d_half}")]
    BelowConstraintOrder { order: u32, d_half: u32 },

    #[error("clique index {index} out of range (cover has {count} cliques)")]
    CliqueIndex { index: usize, count: usize },

    #[error("running intersection property fails at clique {clique}")]
    RipFailsAt { clique: usize },

    #[error("no clique order satisfies the running intersection property")]
    NoOrderExists,

    #[error("moment vector is identically zero")]
    ZeroVector,

    #[error(
        "flatness violated: basis monomial of degree {degree} (relaxation order {omega}) required"
    )]
    FlatnessViolated { degree: u32, omega: u32 },

    #[error("non-physical weights: minimum weight {min_weight:e} below tolerance {tol:e}")]
    NonPhysicalWeights { min_weight: f64, tol: f64 },

    #[error("reconstruction residual {residual:e} exceeds tolerance {tol:e}")]
    ReconstructionFailed { residual: f64, tol: f64 },

    #[error("atom extraction failed: {0}")]
    ExtractionFailed(String),

    #[error("marginal mismatch: {0}")]
    MarginalMismatch(String),

    #[error("assembled measure fails the marginal check on clique {clique}: {detail}")]
    FinalMarginalCheckFailed { clique: usize, detail: String },

    #[error("weight linear program is infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("relaxation order {omega} too low: 2*omega must be at least {needed}")]
    DegreeTooLow { omega: u32, needed: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
