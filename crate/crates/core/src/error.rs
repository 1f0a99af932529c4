use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frequency grid half-extent {half_extent} is below {required} required for scale R = {scale}")]
    GridTooSmall {
        half_extent: f64,
        required: f64,
        scale: f64,
    },

    #[error("quadrature nodes do not match: {0}")]
    GridMismatch(String),

    #[error("scale mismatch: {left} vs {right}")]
    ScaleMismatch { left: f64, right: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("support violation: signal is nonzero at index {0} outside the declared support")]
    SupportViolation(usize),

    #[error("concentration fraction {0} is not below 1")]
    ConcentrationTooLarge(f64),

    #[error("spatial domain is under-resolved: spacing {spacing} exceeds {max}")]
    UnderResolved { spacing: f64, max: f64 },

    #[error("too few points for a fit: need {need}, got {got}")]
    TooFewPoints { need: usize, got: usize },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
