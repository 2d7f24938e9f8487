//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A generation or model spec violates its invariants.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// An argument is out of range for the operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Tensor or matrix shapes are incompatible.
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    /// Input data breaks a pipeline contract (e.g. anomalous nodes in
    /// training data, single-class labels for ranking metrics).
    #[error("data contract violation: {0}")]
    DataContract(String),

    /// A computation produced or encountered non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A serialized artifact (CSV, JSON) could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
