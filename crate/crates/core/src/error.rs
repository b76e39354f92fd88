use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("amplitude vector of length {0} is not a power of two (or is empty)")]
    BadLength(usize),

    #[error("state is not normalized: squared norm is {0}")]
    NotNormalized(f64),

    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error(
        "{num_qubits} qubits exceeds the limit of {max}: the full Pauli spectrum has 4^{num_qubits} entries"
    )]
    TooManyQubits { num_qubits: usize, max: usize },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("ill-typed protocol at {path}: {reason}")]
    IllTyped { path: String, reason: String },

    #[error("every protocol branch fell below the drop threshold")]
    BranchUnderflow,

    #[error("target state has zero magic, conversion into it is unconstrained")]
    FreeTarget,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
