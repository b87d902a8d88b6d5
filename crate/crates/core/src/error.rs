//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {requested} exceeds the supported maximum of {max}")]
    QubitCapacity { requested: usize, max: usize },

    #[error("qubit index {qubit} out of range for {num_qubits} qubits")]
    QubitIndex { qubit: usize, num_qubits: usize },

    #[error("control and target must differ (both are {qubit})")]
    EqualControlTarget { qubit: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("parameter index {index} out of range for {len} parameters")]
    ParameterIndex { index: usize, len: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value {value} outside the open interval ({lo}, {hi})")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("class label {0:?} not present in the data")]
    MissingClass(String),

    #[error("feature column {column} is constant; cannot normalize")]
    ConstantColumn { column: usize },
}
