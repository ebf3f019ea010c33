use thiserror::Error;

/// Errors raised by the vacuum library.
#[derive(Debug, Error)]
pub enum VacuumError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure in {context}: {detail}")]
    Numeric { context: &'static str, detail: String },

    #[error("quadrature did not converge: achieved error {achieved:.3e} > tolerance {tolerance:.3e}")]
    Quadrature { achieved: f64, tolerance: f64 },

    #[error("operator block of dimension {dimension} exceeds the dense capacity {cap}")]
    Capacity { dimension: usize, cap: usize },

    #[error("degenerate vacuum: eigenvalue {eigenvalue:.3e} of D(m = {mass}) lies within {threshold:.1e} of zero")]
    DegenerateVacuum {
        mass: f64,
        eigenvalue: f64,
        threshold: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, VacuumError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(VacuumError::InvalidInput(msg.into()))
}
