//! Error type shared by the series engine and the verification suites.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("truncation profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("unknown variable `{0}` in this profile")]
    UnknownVariable(String),

    #[error("Laurent window exceeded for `{var}` at h-order {h_order}: needed degree {degree}, window floor {floor}")]
    WindowExceeded {
        var: String,
        h_order: usize,
        degree: i64,
        floor: i64,
    },

    #[error("not invertible at this truncation: {0}")]
    NotInvertible(String),

    #[error("requested data outside the valid window: {0}")]
    ValidityExceeded(String),

    #[error("exact division failed: {0}")]
    DivisionNotExact(String),

    #[error("expression not reducible to a jointly lower-bounded form; offending monomial {0}")]
    NotLowerBounded(String),

    #[error("generator depth overflow: needed depth {needed} exceeds configured max {max}; rebuild the context with a larger depth bound")]
    DepthOverflow { needed: usize, max: usize },

    #[error("expansion did not terminate within the configured bound: {0}")]
    ExpansionDiverged(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
