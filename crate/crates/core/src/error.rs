use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value fell outside the interval it must belong to.
    #[error("value {value} is outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Mechanism parameters violate an admissibility constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameters are flagged analysis-only and cannot drive a sampler")]
    AnalysisOnly,
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
