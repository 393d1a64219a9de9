use thiserror::Error;

/// Errors surfaced by tensor, channel, process and witness operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    LabelCollision(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("entry count {got} does not match layout dimensions {expected}")]
    EntryCountMismatch { expected: usize, got: usize },

    #[error("label list is not a permutation of the layout")]
    NotAPermutation,

    #[error("operator is not square over the requested labels")]
    NotSquare,

    #[error("matrix is not unitary: {0}")]
    NotUnitary(String),

    #[error("state is not normalized (norm deviation {0:.3e})")]
    UnnormalizedState(f64),

    #[error("superposition amplitudes must both be nonzero")]
    ZeroAmplitude,

    #[error("causal orders are identical; no oppositely ordered pair of parties")]
    SameCausalOrder,

    #[error("process is not of the expected product form: {0}")]
    NotMarkovian(String),

    #[error("two evaluation routes disagree: {0}")]
    NumericalInconsistency(String),

    #[error("no normalization violation found above threshold {0:.1e}")]
    NoViolationFound(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
