use thiserror::Error;

/// Errors produced by the solvers, samplers and rate evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sinkhorn did not converge in {iterations} iterations (last residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("schrodinger-system residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of a numerical stage (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::ResidualTooLarge { .. } | Error::Solver(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
