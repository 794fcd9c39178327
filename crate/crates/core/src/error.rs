use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid metric space: {0}")]
    InvalidSpace(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("exponent p = {0} is outside (1, inf)")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point index {index} out of range for a space with {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("threshold t = {0} too low: E_t = X")]
    ThresholdTooLow(f64),

    #[error("invalid Whitney domain: {0}")]
    InvalidDomain(String),

    #[error("function family is empty or contains only zero functions")]
    EmptyFamily,

    #[error("improved inequality violated by family member {index}: lhs {lhs} > rhs {rhs}")]
    ImprovementViolated { index: usize, lhs: f64, rhs: f64 },

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}
