use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("norm kind mismatch between operands")]
    NormMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel is not L^{q}-integrable near 0 (gamma = {gamma}; need q(gamma - 1) > -1)")]
    NonIntegrable { q: f64, gamma: f64 },

    #[error("tolerance unreachable: {0}")]
    ToleranceUnreachable(String),

    #[error("domain too short: need t up to {needed}, function ends at {available}")]
    DomainTooShort { needed: f64, available: f64 },

    #[error("malformed input at {path}: {reason}")]
    Format { path: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Numerical failures (as opposed to bad input): divergent kernels,
    /// unreachable tolerances.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonIntegrable { .. } | Error::ToleranceUnreachable(_)
        )
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be a positive finite number, got {value}"),
        ))
    }
}
