use thiserror::Error;

/// Errors raised while building measures and systems or evaluating on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid arc [{alpha}, {beta}]")]
    InvalidArc { alpha: f64, beta: f64 },
    #[error("moment order {requested} exceeds table depth {available}")]
    OrderExceeded { requested: i64, available: i64 },
    #[error("point {0} is too close to the support")]
    TooCloseToSupport(String),
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("unsupported weight: {0}")]
    UnsupportedWeight(String),
    #[error("weight is not sign-definite on its support: {0}")]
    NotSignDefinite(String),
    #[error("supports {0} and {1} overlap")]
    OverlappingSupports(usize, usize),
    #[error("gap {gap:e} between supports {first} and {second} is below the minimum; set touching_ok to allow it")]
    NonIntegrable { first: usize, second: usize, gap: f64 },
    #[error("factor i*F is not real on the first arc (imaginary part {0:e})")]
    NonRealFactor(f64),
    #[error("branch point t0 = {0} lies inside a support arc")]
    BranchInsideSupport(f64),
    #[error("the support arcs cover the whole circle")]
    NoBranchGap,
    #[error("expected {expected} generators, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("operation needs a {expected} system")]
    KindMismatch { expected: &'static str },
    #[error("F vanishes on the first arc (min |F| = {0:e})")]
    FVanishes(f64),
    #[error("flipped first measure deviates from the original by {0:e}")]
    FlipMismatch(f64),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("too many atoms for exact evaluation ({atoms} atoms, M = {m})")]
    TooManyAtoms { atoms: usize, m: usize },
    #[error("matrix shapes do not fit: {0}")]
    ShapeMismatch(String),
    #[error("tuple points are not strictly increasing")]
    UnorderedTuple,
    #[error("coincident points in Cauchy rows")]
    CoincidentPoints,
    #[error("multi-index must be nonzero")]
    ZeroIndex,
    #[error("multi-index {0:?} mixes odd and even components")]
    MixedParity(Vec<usize>),
    #[error("system is numerically singular at the requested index")]
    SingularSystem,
    #[error("index ({n1},{n2}) violates n1 <= n2 - s with s = {s}")]
    IndexConditionViolated { n1: usize, n2: usize, s: usize },
    #[error("loss of positivity at recurrence step {0}")]
    LossOfPositivity(usize),
    #[error("coefficient list too short")]
    TooShort,
    #[error("truncation of size {size} cannot reproduce moments to order {order}")]
    TruncationTooSmall { size: usize, order: usize },
    #[error("Verblunsky coefficient {index} has modulus {modulus} >= 1")]
    ModulusViolation { index: usize, modulus: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
