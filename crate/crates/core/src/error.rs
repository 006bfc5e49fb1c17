use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("coefficient group mismatch: expected {expected}, got {actual}")]
    CoefficientMismatch {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("not representable: {0}")]
    NotRepresentable(String),

    #[error("exponent order violation: need 0 < p < q, got p = {p}, q = {q}")]
    ExponentOrder { p: f64, q: f64 },

    #[error("quadrature budget exceeded: achieved error {achieved:e} > requested {requested:e}")]
    BudgetExceeded { achieved: f64, requested: f64 },

    #[error("insufficient samples: {got} < {min}")]
    InsufficientSamples { got: usize, min: usize },

    #[error("negative kernel entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(LabError::Shape { expected, actual })
    }
}
