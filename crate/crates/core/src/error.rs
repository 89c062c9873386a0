use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("operation requires a bipartite operand")]
    NotBipartite,

    #[error("operation requires a single-system operand")]
    NotSingleSystem,

    #[error("zero vector is not allowed here")]
    ZeroVector,

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("local dimension must be at least 2, found {0}")]
    DimensionTooSmall(usize),

    #[error("states are identical (x = y = 1) and cannot be discriminated")]
    IdenticalStates,

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("sufficient condition does not hold at the requested class parameter")]
    ConditionNotSatisfied,

    #[error("certificate variant {certificate} cannot certify {cone}")]
    VariantMismatch { certificate: String, cone: String },

    #[error("no membership certificate supplied")]
    MissingCertificate,

    #[error("class parameter is zero; no finite copy number exists")]
    ZeroParameter,

    #[error("copy search exceeded the cap of {cap}")]
    SearchCapExceeded { cap: u64 },

    #[error("grid needs at least 2 points, found {0}")]
    InvalidGrid(usize),

    #[error("audit count must be at least 1")]
    EmptyAudit,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("built measurement failed verification: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
