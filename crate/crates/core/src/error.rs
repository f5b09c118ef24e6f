use crate::types::{Currency, ProductClass};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} out of range: {value} ({reason})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid currency code")]
    InvalidCurrency,

    #[error("denomination mismatch: expected {expected}, got {actual}")]
    DenominationMismatch { expected: Currency, actual: Currency },

    #[error("missing quanto fix for {0} contract")]
    MissingQuantoFix(ProductClass),

    #[error("{0} contract does not take a quanto fix")]
    UnexpectedQuantoFix(ProductClass),

    #[error("{0} is not supported for {1} contracts")]
    Unsupported(&'static str, ProductClass),

    #[error("quanto inverse pricing assumes a zero foreign rate, got {0}")]
    NonZeroForeignRate(f64),

    #[error("finite-difference bump crosses the domain boundary: {0}")]
    BumpCrossesBoundary(&'static str),

    #[error("target price {target} below attainable range (minimum {min})")]
    BelowAttainable { target: f64, min: f64 },

    #[error("target price {target} above attainable range (maximum {max})")]
    AboveAttainable { target: f64, max: f64 },

    #[error("no root bracketed for target price {0}")]
    NoRoot(f64),

    #[error("computed price {0} is negative beyond rounding")]
    NegativePrice(f64),

    #[error("invalid path configuration: {0}")]
    InvalidPathConfig(&'static str),

    #[error("invalid hedge configuration: {0}")]
    InvalidHedgeConfig(&'static str),
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            reason: "must be positive",
        })
    }
}
