//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the learning core, the estimator emulation, the
/// circuit simulator and the IO layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A label outside the domain required by the problem kind (e.g. a
    /// non-`±1` label for logistic or hinge).
    #[error("invalid label {label} for {kind} loss")]
    InvalidLabel { kind: &'static str, label: f64 },

    /// A non-finite value where a finite one is required.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },

    /// A parameter outside its documented range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Vector or stream dimensions disagree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An index (round or coordinate) outside its valid range.
    #[error("{what} {got} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// Empty input where at least one element is required.
    #[error("empty input: {context}")]
    EmptyInput { context: &'static str },

    /// Fixed-point register or format violation in the circuit simulator.
    #[error("circuit error: {0}")]
    Circuit(String),

    /// Malformed dataset file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn circuit(msg: impl Into<String>) -> Self {
        Error::Circuit(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
