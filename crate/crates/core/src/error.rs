//! Crate-wide error type.

use core::fmt;

/// Errors reported by samplers, potentials and diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter(&'static str),
    /// An input value is NaN or infinite where a finite number is required.
    NonFinite(&'static str),
    /// Two containers that must agree in length do not.
    DimensionMismatch {
        /// Expected length.
        expected: usize,
        /// Length actually supplied.
        actual: usize,
    },
    /// An operation that needs data received an empty collection.
    EmptyInput(&'static str),
    /// A named functional is not recorded in the trace.
    UnknownFunctional,
    /// A statistical precondition of an estimator fails.
    Precondition(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NonFinite(what) => write!(f, "non-finite value: {what}"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            Error::EmptyInput(what) => write!(f, "empty input: {what}"),
            Error::UnknownFunctional => write!(f, "functional not recorded in trace"),
            Error::Precondition(what) => write!(f, "precondition failed: {what}"),
        }
    }
}

impl core::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
