use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A product of basis symbols is not expressible over the declared basis.
    #[error("UNSUPPORTED-BASIS: product {product} is not expressible in the declared basis")]
    UnsupportedBasis { product: String },

    #[error("symbol `{0}` is not declared in the basis")]
    UnknownSymbol(String),

    #[error("malformed number or expression `{0}`")]
    Parse(String),

    #[error("system has no exact frequency shadow")]
    MissingShadow,

    #[error("operation not supported for {0}")]
    UnsupportedSystem(&'static str),

    #[error("time {0} is not an integer but the system is discrete")]
    NonIntegralTime(f64),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("point clouds live in different spaces")]
    SpaceMismatch,

    #[error("COMMUTATION-VIOLATION: actions differ by {gap:e} on a sample point")]
    CommutationViolation { gap: f64 },

    #[error("INDEPENDENCE-VIOLATION: polynomial family is not R-independent")]
    IndependenceViolation,

    #[error("repeated or zero multiplier in alphas")]
    RepeatedAlphas,

    #[error("element {0} is not central")]
    NotCentral(String),

    #[error("tuple is not a member of the embedded subgroup")]
    NotMember,

    #[error("unsupported observable: {0}")]
    UnsupportedObservable(&'static str),

    #[error("unsupported projection for this system")]
    UnsupportedProjection,

    #[error("callback observable has no declared sup bound")]
    MissingBound,

    #[error("window [{start}, {end}] exceeds the series span")]
    WindowOutOfRange { start: f64, end: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
