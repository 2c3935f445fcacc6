use thiserror::Error;

/// Errors raised by problem setup, mesh construction, the discrete operator
/// and the Newton solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("zero or non-finite pivot {pivot} at row {row}")]
    Singular { row: usize, pivot: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },

    #[error(
        "Newton iteration did not converge after {} iterations (last residual {:.3e})",
        .0.iterations,
        .0.residual_history.last().copied().unwrap_or(f64::NAN)
    )]
    NonConvergence(Box<NonConvergence>),
}

/// State carried out of a failed Newton solve.
#[derive(Debug, Clone)]
pub struct NonConvergence {
    pub iterations: usize,
    pub last_iterate: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub step_history: Vec<f64>,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Length { expected, got })
    }
}
