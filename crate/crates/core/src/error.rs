use thiserror::Error;

/// Errors raised by the library. Property failures are not errors; they are
/// reported as data by the verifiers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("not an up-set: {0}")]
    NotOpen(String),

    #[error("functoriality violated: {0}")]
    NotFunctorial(String),

    #[error("morphism does not commute: {0}")]
    NotNatural(String),

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("malformed periodic description: {0}")]
    MalformedPeriodic(String),

    #[error("open set not representable: {0}")]
    NotRepresentable(String),

    #[error("inverse system did not stabilize within {depth} stages (stage dims {dims:?})")]
    NotStable { depth: usize, dims: Vec<usize> },

    #[error("stabilization certificate violated: {0}")]
    Certificate(String),

    #[error("invalid site map: {0}")]
    InvalidSiteMap(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("instance too large: {0}")]
    Oversize(String),

    #[error("point not representable: {0}")]
    PointNotRepresentable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
