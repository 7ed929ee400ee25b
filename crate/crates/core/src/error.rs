use thiserror::Error;

/// Errors raised by the laboratory. Every variant corresponds to a violated
/// precondition or a numerical contract that could not be met.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension n = {0} is outside the supported range")]
    Dimension(i64),

    #[error("exponent formula has non-positive denominator {denominator}")]
    NonPositiveDenominator { denominator: f64 },

    #[error("no lifespan entry for n = {n}, alpha = {alpha} with flags {flags}")]
    UnknownTableCell { n: u32, alpha: u32, flags: String },

    #[error("no blow-up observed up to t = {t_reached:e} (F = {final_f:e})")]
    NoBlowup { t_reached: f64, final_f: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("iteration did not contract: {0}")]
    NotContracting(String),

    #[error("sweep failed: {0}")]
    SweepFailed(String),

    #[error("missing input: {0}")]
    MissingInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
