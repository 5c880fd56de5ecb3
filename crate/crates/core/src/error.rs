use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("diagonal block {index} is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularDiagonalBlock { index: usize, condition: f64 },

    #[error("matrix `{what}` is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularMatrix { what: String, condition: f64 },

    #[error("modeling assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("scattering matrix has an eigenvalue at 1: open-circuit load has no finite impedance")]
    OpenCircuitSingularity,

    #[error("full channel model requested but side links are missing")]
    MissingSideLinks,

    #[error("sector index out of range: {0}")]
    SectorIndexOutOfRange(String),

    #[error("invalid sector layout: {0}")]
    InvalidSectorSpec(String),

    #[error("invalid scattering matrix: {0}")]
    InvalidScattering(String),

    #[error("link `{link}` is not rank one (relative residual {residual:e})")]
    NotRankOne { link: String, residual: f64 },

    #[error("zero vector in inner problem data")]
    ZeroVector,

    #[error("cascade of {l} RISs exceeds the bound enumeration cap of {cap}")]
    CascadeTooLong { l: usize, cap: usize },

    #[error("empty sample set")]
    EmptySample,

    #[error("degenerate denominator in ratio metric")]
    DegenerateDenominator,

    #[error("empty singular-value sequence")]
    EmptySequence,

    #[error("closed form exceeds the floating-point range: {0}")]
    RangeExceeded(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
