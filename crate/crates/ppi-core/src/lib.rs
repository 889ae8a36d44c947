//! Prediction-powered mean estimation with exact finite-sample error analysis.
//!
//! The mean-estimation problem: estimate `θ = E[Y]` from a small labeled sample
//! of `(y, f)` pairs, where `f` is a cheap pseudo-label (a model prediction),
//! plus an effectively unlimited pool of unlabeled pseudo-labels. The
//! prediction-powered family corrects the pseudo-label mean by a data-tuned
//! coefficient `λ`, trading a variance reduction proportional to the
//! pseudo-label quality against the cost of estimating that quality from the
//! same scarce labels.
//!
//! This crate ships three layers:
//!
//! - the estimators themselves ([`estimators`]): classical, PPI, power-tuned
//!   PPI++ in finite-pool, single-sample, split-sample, and cross-fit forms,
//!   plus the variance estimators used for interval construction;
//! - the exact finite-sample theory ([`theory`]): MSE decompositions into
//!   classical variance, efficiency gain, and efficiency loss; the
//!   covariance-estimation-error formula that drives them; improvement
//!   thresholds for Gaussian and signed-binary data; the single-sample bias;
//!   and tipping-point sample sizes;
//! - the verification machinery: an exact enumeration oracle over finite
//!   discrete joint laws ([`oracle`]) and a seeded, deterministic Monte Carlo
//!   harness ([`simulate`]) that reproduces relative-MSE curves and
//!   coverage/width comparisons.
//!
//! Moment bookkeeping lives in [`moments`] and the generative specifications
//! and samplers in [`distributions`].

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod moments;
pub mod oracle;
pub mod simulate;
pub mod theory;
pub(crate) mod threads;

pub use error::{Error, Result};
pub use moments::{EmpiricalMomentOptions, JointMoments, SignedBinaryPmf};
pub use oracle::DiscreteJointSpec;
