//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported qubit count {n}: {reason}")]
    UnsupportedQubitCount { n: usize, reason: String },

    #[error("qubit index {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("invalid qubit pair ({a}, {b})")]
    InvalidPair { a: usize, b: usize },

    #[error("error rate {0} outside [0, 1]")]
    InvalidErrorRate(f64),

    #[error("invalid bipartition: |A| = {len_a} for {n} qubits")]
    InvalidBipartition { len_a: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigensolver failed to converge (LAPACK info = {info})")]
    EigensolverFailure { info: i32 },

    #[error("linear-algebra backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("negativity routes disagree: negative-sum {neg_sum} vs trace-norm {trace_norm}")]
    NegativityRouteMismatch { neg_sum: f64, trace_norm: f64 },

    #[error("invalid circuit spec: {0}")]
    InvalidSpec(String),

    #[error("empty trace")]
    EmptyTrace,

    #[error("degenerate abscissa: need at least two distinct sizes")]
    DegenerateAbscissa,

    #[error("under-determined fit: {got} sizes present, {need} required")]
    UnderDetermined { got: usize, need: usize },

    #[error("no crossing found: curves are ordered identically over the sampled range")]
    NoCrossing,

    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),

    #[error("resume conflict in {path}: {reason}")]
    ResumeConflict { path: String, reason: String },

    #[error("malformed dataset row {row} in {path}: {reason}")]
    MalformedRow {
        path: String,
        row: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
