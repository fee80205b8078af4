use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid sparsity: k = {k} must satisfy 0 < k <= n = {n}")]
    InvalidSparsity { k: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("degenerate input: sensing row has zero norm")]
    DegenerateRow,

    #[error("filter diverged at iteration {iteration}")]
    Diverged { iteration: u64 },

    #[error("singular denominator `{denominator}` in steady-state bound")]
    Singular { denominator: &'static str },

    #[error("recursion is not a contraction: linear coefficient {coefficient}")]
    NotContracting { coefficient: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, found })
    }
}
