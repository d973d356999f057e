use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A series hit its term cap before the stopping rule was met.
    #[error("series truncated after {terms} terms (partial sum {partial})")]
    Truncation { partial: f64, terms: usize },

    /// An alternating series produced a partial sum outside the probability range.
    #[error("series diverged: partial sum {partial} exceeds the probability range")]
    Divergence { partial: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid probability rule: {0}")]
    InvalidRule(String),

    #[error("jump keys do not match: {0}")]
    KeyMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("insufficient mass for binning: total expected count {0}")]
    InsufficientMass(f64),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
