use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state vector is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("subsystem dims {dims:?} do not multiply to total dimension {total}")]
    SubsystemMismatch { dims: Vec<usize>, total: usize },

    #[error("invalid subsystem selection {0:?}")]
    InvalidSubsystems(Vec<usize>),

    #[error("POVM effects do not sum to identity (max deviation {0:.3e})")]
    IncompletePovm(f64),

    #[error("outcome probabilities sum to {0}, expected 1")]
    InvalidProbabilities(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{what} = {value} out of range (expected {range})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error(
        "state set does not match the cyclic-symmetric overlap pattern (max deviation {0:.3e})"
    )]
    NotSymmetricSet(f64),

    #[error("Gram parameters give a non-PSD matrix (min eigenvalue {0:.3e})")]
    InvalidGram(f64),

    #[error("optimizer did not converge after {iterations} iterations (best value {best})")]
    OptimizerStalled { iterations: usize, best: f64 },

    #[error("invalid protocol configuration: {0}")]
    InvalidConfig(String),

    #[error("input pair must differ in exactly one bit: {0} vs {1}")]
    InvalidInputPair(String, String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed count table: {0}")]
    MalformedTable(String),

    #[error("duplicate (input, outcome) pair: ({0}, {1})")]
    DuplicateRow(String, String),

    #[error("zero total counts in input group {0}")]
    ZeroCounts(String),

    #[error("label mismatch: {0}")]
    LabelMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
