use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("level {level} is not strictly inside (-n*kappa, n*kappa) = ({}, {bound}); the interval would be unbounded", -bound)]
    NoSolution { level: f64, bound: f64 },

    #[error("cutoff {cutoff} is infeasible for kappa = {kappa}: need n*kappa > sqrt(n)*cutoff (n = {n}); increase kappa")]
    InfeasibleCutoff { kappa: f64, cutoff: f64, n: usize },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
