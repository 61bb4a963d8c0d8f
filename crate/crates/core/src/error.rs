use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range [{1}, {2}]")]
    QubitRange(usize, usize, usize),

    #[error("invalid density {0}: must lie in (0, 1]")]
    Density(f64),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("row {0} of the matrix has no nonzero entry")]
    ZeroRow(usize),

    #[error("matrix is the zero matrix")]
    ZeroMatrix,

    #[error("right-hand side is the zero vector")]
    ZeroRhs,

    #[error("vector is not unit norm (norm = {0})")]
    NotUnit(f64),

    #[error("padded dimension {0} exceeds the cap of 4096")]
    TooLarge(usize),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("qubit index {index} out of range for {qubits} qubits")]
    QubitIndex { index: usize, qubits: usize },

    #[error("controlled gate needs two distinct qubits, got {0} twice")]
    SameQubit(usize),

    #[error("parameter shape mismatch: expected {expected_rows}x3, got {detail}")]
    Shape { expected_rows: usize, detail: String },

    #[error("non-finite parameter value {0}")]
    NonFinite(f64),

    #[error("degenerate cost: <psi|psi> = {0:e} is below 1e-14")]
    Degenerate(f64),

    #[error("iteration {iter}: {source}")]
    AtIteration {
        iter: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("duplicate Pauli string {0} in decomposition")]
    DuplicateTerm(String),

    #[error("invalid Pauli label {0:?}")]
    PauliLabel(String),

    #[error("finite-difference step must be nonzero and finite")]
    Step,

    #[error("need at least 10 ids to split, got {0}")]
    TooFewIds(usize),

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("id {0:?} not found")]
    MissingId(String),

    #[error("minimum-norm solution vanishes: b is orthogonal to the range of A")]
    OutsideRange,

    #[error("matrix is singular (condition estimate {0:e})")]
    Singular(f64),

    #[error("edge ({0}, {1}) out of range for dimension {2}")]
    EdgeIndex(usize, usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("all {0} restarts failed; last error: {1}")]
    AllRestartsFailed(usize, Box<Error>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when this error (or the error it wraps) is a degenerate-cost failure.
    pub fn is_degenerate(&self) -> bool {
        match self {
            Error::Degenerate(_) => true,
            Error::AtIteration { source, .. } => source.is_degenerate(),
            Error::AllRestartsFailed(_, last) => last.is_degenerate(),
            _ => false,
        }
    }
}
