//! Crate-wide error type.

use thiserror::Error;

/// Errors shared across the estimator, theory, oracle, and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Too few observations for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Moment set violates a structural constraint (e.g. Cauchy-Schwarz).
    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    /// A pmf or generative spec fails validation.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// The pseudo-label variance is zero (or not positive), so `λ = σ_yf/σ_f²`
    /// is undefined.
    #[error("degenerate pseudo-label variance: {0}")]
    DegenerateF(String),

    /// The label variance is zero where a formula divides by it.
    #[error("degenerate label variance: {0}")]
    DegenerateY(String),

    /// A sample-size argument is outside a formula's domain.
    #[error("invalid sample size: {0}")]
    InvalidSampleSize(String),

    /// No sample size can satisfy the improvement condition (e.g. `c·n ≤ 2`).
    #[error("no improvement possible: {0}")]
    NoImprovementPossible(String),

    /// Moments were expected to satisfy the Gaussian higher-moment identities
    /// and do not.
    #[error("moments are not Gaussian-consistent: {0}")]
    NonGaussianMoments(String),

    /// The enumeration outcome space exceeds the configured budget.
    #[error("enumeration too large: {0}")]
    EnumerationTooLarge(String),

    /// An experiment configuration fails validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
