use thiserror::Error;

use crate::scenarios::ValidationError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("subsystem `{label}` has dimension {dim}, at least 2 is required")]
    DimTooSmall { label: String, dim: usize },
    #[error("a register needs at least one subsystem")]
    EmptyRegister,
    #[error("total dimension {0} exceeds the dense limit of {limit}", limit = crate::hilbert::MAX_TOTAL_DIM)]
    TooLarge(usize),
    #[error("amplitude vector has zero norm")]
    ZeroVector,
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("subsystem `{0}` appears in both registers")]
    LabelClash(String),
    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("unknown target `{0}`")]
    UnknownTarget(String),
    #[error("target `{0}` listed twice")]
    DuplicateTarget(String),
    #[error("partial trace would discard every subsystem")]
    NothingKept,
    #[error("ensemble probabilities sum to {0}, expected 1")]
    ProbabilitySumInvalid(f64),
    #[error("registers do not match")]
    RegisterMismatch,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid measurement basis: {0}")]
    InvalidBasis(String),
    #[error("invalid unitary: {0}")]
    InvalidUnitary(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("scenario failed validation ({} problem(s))", .0.len())]
    InvalidScenario(Vec<ValidationError>),
    #[error("the unitary-only policy produces no outcome ensemble")]
    PolicyHasNoOutcomes,
    #[error("at least one run is required")]
    NoRuns,
    #[error("agent `{0}` has no predictions in the table")]
    MissingAgent(String),
}
