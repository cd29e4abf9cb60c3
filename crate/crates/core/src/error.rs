//! Error type shared by all modules of the crate.

/// Errors produced by forward models, solvers and fits.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solver did not converge; the message carries diagnostics.
    #[error("solver error: {0}")]
    Solver(String),

    /// Evaluation at or too close to a pole (e.g. a diverging Josephson
    /// inductance).
    #[error("singularity: {0}")]
    Singular(String),

    /// A closed-form inversion was requested outside its validity regime.
    #[error("regime error: {0}")]
    Regime(String),

    /// Measured inputs are inconsistent with the model assumptions.
    #[error("data quality error: {0}")]
    DataQuality(String),

    /// Two data sets that must share a grid do not.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// A least-squares fit failed; the message carries seed diagnostics.
    #[error("fit error: {0}")]
    Fit(String),

    /// A fit problem is rank-deficient or has too few points.
    #[error("conditioning error: {0}")]
    Conditioning(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn solver(msg: impl Into<String>) -> Self {
        Error::Solver(msg.into())
    }
    pub fn singular(msg: impl Into<String>) -> Self {
        Error::Singular(msg.into())
    }
    pub fn regime(msg: impl Into<String>) -> Self {
        Error::Regime(msg.into())
    }
    pub fn data_quality(msg: impl Into<String>) -> Self {
        Error::DataQuality(msg.into())
    }
    pub fn alignment(msg: impl Into<String>) -> Self {
        Error::Alignment(msg.into())
    }
    pub fn fit(msg: impl Into<String>) -> Self {
        Error::Fit(msg.into())
    }
    pub fn conditioning(msg: impl Into<String>) -> Self {
        Error::Conditioning(msg.into())
    }
}
