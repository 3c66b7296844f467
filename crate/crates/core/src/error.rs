use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported exponent q={0}: q must be a positive even integer")]
    UnsupportedExponent(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("frequency box is empty")]
    EmptyBox,

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("operation requires an equal-weight lattice rule, got {0}")]
    NotLattice(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("quasi-algebra constant missing: run quasi_algebra_constant on the class first")]
    MissingQuasiAlgebraConstant,

    #[error("no nonzero dual lattice point within |k_j| <= {0}")]
    NoDualPoint(u64),

    #[error("constraint nullspace is trivial: only f = 0 vanishes on the nodes within this box")]
    TrivialNullspace,

    #[error("function is not real-valued (conjugate symmetry fails by {0:e})")]
    NotReal(f64),

    #[error("cubature weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),

    #[error("class membership violated: norm {norm} exceeds {limit} ({context})")]
    MembershipViolation { norm: f64, limit: f64, context: String },

    #[error("degenerate design matrix in rate fit")]
    DegenerateFit,

    #[error("entropy sequence too short: index {needed} required, {available} available")]
    EntropyTooShort { needed: u64, available: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("rule {rule}: {source}")]
    InRule {
        rule: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Attach the identifier of the rule being processed.
    pub fn in_rule(self, rule: impl Into<String>) -> Self {
        Error::InRule {
            rule: rule.into(),
            source: Box::new(self),
        }
    }
}
