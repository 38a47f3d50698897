use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants map onto the command-line exit codes: configuration and
/// validation problems are user errors, `Refusal` is a numerical refusal
/// (under-resolution), `Consistency` signals a broken internal invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid tensor: {0}")]
    Validation(String),

    #[error("singular tensor (determinant {det:e})")]
    Singular { det: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("refusing under-resolved computation: {reason} (required N >= {required_n})")]
    Refusal { reason: String, required_n: usize },

    #[error("value {value} outside achieved range [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("statistical failure: {0}")]
    Statistical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
