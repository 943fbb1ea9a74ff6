use thiserror::Error;

/// Failure classes shared by every module. The CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Bad argument: domain violation, non-finite number, inconsistent ordering.
    #[error("invalid input: {0}")]
    Input(String),
    /// Malformed tabular input.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Inputs are valid numbers but outside the regime where a formula applies.
    #[error("out of regime: {0}")]
    Regime(String),
    /// A solver failed to bracket, converge or keep precision.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        input(format!("{name} must be finite, got {x}"))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        input(format!("{name} must be positive and finite, got {x}"))
    }
}
