use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data is malformed (non-finite values, length mismatch, negative densities).
    #[error("invalid data: {0}")]
    Data(String),

    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A model ingredient (cross function, fast-reaction rates) fails validation.
    #[error("invalid model: {0}")]
    Model(String),

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:e}, tolerance {tolerance:e})")]
    LinearSolve {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("positivity violated at t = {t}: {field} reached {value:e} in cell {cell}; reduce dt")]
    Positivity {
        t: f64,
        field: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("step failed at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("incompatible inputs: {0}")]
    Comparison(String),

    #[error("configuration errors: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Config(Vec<ConfigError>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that stem from user input rather than a failing solver.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Data(_) | Error::Parameter(_) | Error::Model(_) | Error::Config(_) | Error::Io(_)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Data(_) => "data",
            Error::Parameter(_) => "parameter",
            Error::Model(_) => "model",
            Error::LinearSolve { .. } => "linear_solve",
            Error::Positivity { .. } => "positivity",
            Error::Step { .. } => "step",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Comparison(_) => "comparison",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
