use thiserror::Error;

use crate::core::ValidationReport;

/// Unified error type for the crate.
///
/// `NonConvergence` is the only variant that maps to CLI exit code 2; every
/// other variant is an input/validation problem (exit code 1).
#[derive(Debug, Error)]
pub enum JungleError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible calibration input: {0}")]
    CalibrationDomain(String),

    #[error("no convergence after {iterations} iterations (best residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("portfolio validation failed:\n{0}")]
    InvalidPortfolio(ValidationReport),

    #[error("exact enumeration supports n <= {cap}, got n = {n}")]
    EnumerationTooLarge { n: usize, cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, JungleError>;
