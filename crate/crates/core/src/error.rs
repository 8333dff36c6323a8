use thiserror::Error;

/// Errors raised by the engine.
///
/// Semantic defects in a strata complex (imperfect pairings, failing
/// relations) are not errors: they are collected as violations by
/// [`crate::strata::validate`]. Errors are reserved for malformed input and
/// for operations whose preconditions do not hold.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map does not descend to the quotient: {0}")]
    NotWellDefined(String),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("denominator is not contained in numerator")]
    NotSubspace,

    #[error("invalid rational {0:?}")]
    BadRational(String),

    #[error("malformed strata complex: {0}")]
    Malformed(String),

    #[error("missing restriction {from:?} -> {to:?} in degree {degree}")]
    MissingRestriction {
        from: Vec<usize>,
        to: Vec<usize>,
        degree: u32,
    },

    #[error("pairing not perfect at face {face:?} in degree {degree}")]
    PairingNotPerfect { face: Vec<usize>, degree: u32 },

    #[error("strata complex failed validation with {0} violation(s)")]
    Invalid(usize),

    #[error("d1 does not square to zero at E1^({a},{b})")]
    DifferentialNotSquareZero { a: i32, b: i32 },

    #[error("strata are not cycle-generated")]
    NotCycleGenerated,

    #[error("induced pairing on H(V) is ill defined at bidegree ({i},{j})")]
    InducedPairingIllDefined { i: i32, j: i32 },

    #[error("slopes are unavailable: strata are not cycle-generated")]
    SlopesUnavailable,

    #[error("slopes are not integral: {0}")]
    NonIntegralSlopes(String),

    #[error("invalid (phi,N)-module: {0}")]
    InvalidModule(String),

    #[error("invalid scenario parameters: {0}")]
    InvalidParameters(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
