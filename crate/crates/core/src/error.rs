use thiserror::Error;

/// Errors raised by the geometry, coding and fixed-point routines.
#[derive(Debug, Error)]
pub enum GifsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty point set")]
    EmptySet,

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid arity profile: {0}")]
    InvalidProfile(String),

    #[error("invalid address {digits:?}: {reason}")]
    InvalidAddress { digits: Vec<u32>, reason: String },

    #[error("indexing function violates its constraint: {0}")]
    IndexingConstraint(String),

    #[error("insufficient input: {0}")]
    InsufficientInput(String),

    #[error("infeasible geometry at depth {depth}: {reason}")]
    InfeasibleGeometry { depth: usize, reason: String },

    #[error("point {0:?} lies in no cell of the set")]
    NotInSet(Vec<f64>),

    #[error("point {0:?} lies outside the map domain")]
    OutsideDomain(Vec<f64>),

    #[error("tuple enumeration needs {needed} tuples, cap is {cap}")]
    TupleExplosion { needed: u128, cap: u128 },

    #[error("declared contraction factor {0} is not below 1")]
    NonContractive(f64),

    #[error("sample is inconsistent with declared Lipschitz bound {bound}: pair ({i}, {j}) has ratio {ratio}")]
    InconsistentSample {
        bound: f64,
        i: usize,
        j: usize,
        ratio: f64,
    },

    #[error("refinement order {needed} exceeds tree depth {depth}")]
    DepthExceeded { needed: usize, depth: usize },

    #[error("cell cover at depth {depth} has diameter bound {bound} above delta {delta}")]
    CoverTooCoarse { depth: usize, bound: f64, delta: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GifsError>;
