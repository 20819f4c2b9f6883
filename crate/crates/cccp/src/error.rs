use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state index {k} out of range 0..={n}")]
    StateOutOfRange { k: usize, n: usize },

    /// At `p = 1` the full collection is unreachable, so state `n` is not
    /// absorbing from below and the hitting-time system is singular.
    #[error("non-absorbing chain: at p = 1 the collection never completes (expected hitting time is infinite)")]
    NonAbsorbing,

    #[error("epsilon {epsilon} out of range (0, {limit})")]
    InvalidEpsilon { epsilon: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
