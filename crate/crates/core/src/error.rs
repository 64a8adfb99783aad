use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("determinant drift {drift:e} exceeds tolerance")]
    NotSpecialLinear { drift: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("point outside ambient space: {0}")]
    PointOutsideAmbient(String),
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),
    #[error("no closed-form sublevel supremum for rho={rho}, tau={tau}")]
    UnsupportedPair { rho: String, tau: String },
    #[error("zero point at index {0}")]
    ZeroPoint(usize),
    #[error("interpolation nodes {0} and {1} collide")]
    DuplicateNodes(usize, usize),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("map does not fix the origin: |phi(0)| = {0:e}")]
    NotOriginFixing(f64),
    #[error("inconclusive prefix: {0}")]
    InconclusivePrefix(String),
    #[error("rescale product at step {step} is not one")]
    ProductNotOne { step: usize },
    #[error("rescale condition ({condition}) fails at step {step}, row {row}")]
    ConditionViolated { step: usize, condition: &'static str, row: usize },
    #[error("alignment infeasible at step {step}: {reason}")]
    AlignmentInfeasible { step: usize, reason: String },
    #[error("first columns differ by {0:e}")]
    NotSameFiber(f64),
    #[error("fiber coordinates disagree by {0:e}")]
    InconsistentFiber(f64),
    #[error("matrix {0} is not diagonal")]
    NotDiagonal(usize),
    #[error("point {0} is not on the declared subgroup")]
    NotOnSubgroup(usize),
    #[error("every column of the subgroup family is constant")]
    AllColumnsConstant,
    #[error("points {0} and {1} share a projected image")]
    FiberCollision(usize, usize),
    #[error("interpolation ill-conditioned: {0}")]
    InterpolationIllConditioned(String),
    #[error("height target unreachable for point {0}")]
    HeightUnreachable(usize),
    #[error("lambda vanishes at the requested point")]
    LambdaVanishes,
    #[error("pipeline stage {stage} failed: {reason}")]
    StageFailed { stage: u8, reason: String },
    #[error("empty result")]
    EmptyResult,
    #[error("unsupported field: {0}")]
    UnsupportedField(String),
    #[error("zero vector")]
    ZeroVector,
    #[error("threshold search exhausted at level {level}")]
    SearchExhausted { level: usize },
    #[error("no point exceeds the first threshold")]
    PrefixTooBounded,
    #[error("matrix logarithm unavailable: {0}")]
    NonGenericLog(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("unknown family: {0}")]
    UnknownFamily(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

