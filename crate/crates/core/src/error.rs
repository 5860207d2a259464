use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("leafwise form of degree {degree} has no differential (top degree is {top})")]
    TopDegree { degree: usize, top: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported model for {operation}: {reason}")]
    UnsupportedModel {
        operation: &'static str,
        reason: String,
    },

    #[error("t-grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("mismatched reports: {0}")]
    MismatchedReports(String),

    #[error("invalid volume form: {0}")]
    InvalidVolume(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
