use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),

    #[error("not a permutation of 0..{n}: {reason}")]
    NotAPermutation { n: usize, reason: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid spin value {0}; spins must be -1 or +1")]
    InvalidSpin(i64),

    #[error("enumeration of 2^{n} configurations exceeds the cap of 2^{cap}")]
    EnumerationTooLarge { n: usize, cap: usize },

    #[error("parent set of node {node} has {size} members; at most {max} supported")]
    TooManyParents { node: usize, size: usize, max: usize },

    #[error("node {0} appears in its own parent list")]
    SelfParent(usize),

    #[error("total sample weight is zero")]
    ZeroWeight,

    #[error("optimizer did not converge for node {node} after {iterations} iterations (gradient norm {grad_norm:e})")]
    NotConverged {
        node: usize,
        iterations: usize,
        grad_norm: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NodeOutOfRange { .. } => "node_out_of_range",
            Error::InvalidEdge(..) => "invalid_edge",
            Error::NotAPermutation { .. } => "not_a_permutation",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidSpin(_) => "invalid_spin",
            Error::EnumerationTooLarge { .. } => "enumeration_too_large",
            Error::TooManyParents { .. } => "too_many_parents",
            Error::SelfParent(_) => "self_parent",
            Error::ZeroWeight => "zero_weight",
            Error::NotConverged { .. } => "not_converged",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
