use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of an operation (q beyond a table, x outside I, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Closed-form series classification only exists for power-log families.
    #[error("unsupported approximation family for classification: {0}")]
    UnsupportedFamily(String),

    #[error("curve evaluation failed at x = {x}: {what}")]
    Evaluation { x: f64, what: String },

    #[error("resource guard: predicted {predicted:.3e} elements exceeds limit {limit:.1e}")]
    ResourceGuard { predicted: f64, limit: f64 },

    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }
}
