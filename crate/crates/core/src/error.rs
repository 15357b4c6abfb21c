use alloc::string::String;
use core::fmt;

use crate::sdp::SdpStatus;

/// Errors produced by the core routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration or input value violates its documented domain.
    InvalidConfig(String),
    /// Two inputs that must agree in size do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A matrix that must be inverted is singular or too badly conditioned.
    IllConditioned { condition: f64 },
    /// A matrix that must be Hermitian (or symmetric) is not.
    NotHermitian { deviation: f64 },
    /// An allocation or selection could not be produced.
    AllocationFailed {
        reason: String,
        status: Option<SdpStatus>,
    },
    /// An enumeration would exceed its size cap.
    TooLarge { candidates: u128, cap: u128 },
    /// A text problem description could not be parsed.
    Parse { line: usize, message: String },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn failed(reason: impl Into<String>, status: Option<SdpStatus>) -> Self {
        Error::AllocationFailed {
            reason: reason.into(),
            status,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "dimension mismatch in {what}: expected {expected}, found {found}"),
            Error::IllConditioned { condition } => {
                write!(f, "ill-conditioned matrix (condition number {condition:.3e})")
            }
            Error::NotHermitian { deviation } => {
                write!(f, "matrix is not Hermitian (max deviation {deviation:.3e})")
            }
            Error::AllocationFailed { reason, status } => match status {
                Some(s) => write!(f, "allocation failed: {reason} (solver status {s:?})"),
                None => write!(f, "allocation failed: {reason}"),
            },
            Error::TooLarge { candidates, cap } => {
                write!(f, "enumeration of {candidates} candidates exceeds cap {cap}")
            }
            Error::Parse { line, message } => write!(f, "parse error on line {line}: {message}"),
        }
    }
}

impl core::error::Error for Error {}
