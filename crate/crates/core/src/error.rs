use thiserror::Error;

use crate::polybasis::Family;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported scheme: {family:?} with q = {q} ({reason})")]
    UnsupportedScheme {
        family: Family,
        q: usize,
        reason: &'static str,
    },

    #[error("root finder did not converge for {what} (q = {q})")]
    RootNotConverged { what: &'static str, q: usize },

    #[error("interpolation nodes are not pairwise distinct (index {0} and {1})")]
    DuplicateNodes(usize, usize),

    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid time partition: {0}")]
    Partition(String),

    #[error("invalid operator: {0}")]
    Operator(String),

    #[error("singular local system on interval {interval}")]
    SingularSystem { interval: usize },

    #[error("estimate {estimate} does not apply to {method}")]
    EstimateMismatch { estimate: String, method: String },

    #[error("sobol dimension {0} out of range (1..=16)")]
    SobolDimension(usize),

    #[error("non-finite gradient in parameter block {block}")]
    NonFiniteGradient { block: String },

    #[error("non-finite loss at epoch {epoch} (sample {sample:?})")]
    NonFiniteLoss { epoch: usize, sample: Option<usize> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint format error at line {line}: {msg}")]
    Checkpoint { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
