use thiserror::Error;

/// Errors shared across the whole crate.
///
/// The variants map onto the failure classes of the experiment pipeline:
/// bad inputs, exhausted compute budgets, and numerical accuracy targets
/// that could not be met.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter lies outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configured resource budget (replicates, kernel-sum size, ...) was exceeded.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A quadrature or other numeric routine could not reach the requested
    /// accuracy. Carries the best estimate achieved so callers can still
    /// inspect it.
    #[error("accuracy target {target:e} not reached in {context}: error estimate {error_estimate:e}, best value {estimate}")]
    Accuracy {
        /// Best value computed before giving up.
        estimate: f64,
        /// Estimated absolute error of `estimate`.
        error_estimate: f64,
        /// The absolute tolerance that was requested.
        target: f64,
        /// Which computation failed.
        context: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
