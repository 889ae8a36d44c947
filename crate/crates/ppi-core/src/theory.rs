//! Exact finite-sample error theory for the prediction-powered estimators.
//!
//! The central object is the covariance-estimation error
//! `E[(σ̂_fy - σ_fy)²]` of the unbiased sample covariance on `n` pairs.
//! For any joint law with bounded fourth moments,
//!
//! ```text
//! E[(σ̂_fy - σ_fy)²] = σ_{f²y²}/n + σ_f²σ_y²/(n-1) - (n-2)σ_fy²/(n(n-1))
//!                      - (2/n)[σ_{y²f}μ_f + σ_{f²y}μ_y - 2σ_fy μ_f μ_y]
//! ```
//!
//! The split-sample estimator's MSE decomposes around it:
//!
//! ```text
//! MSE_split(n) = σ_y²/n - σ_fy²/(nσ_f²) + E[(σ̂_fy - σ_fy)²]/(nσ_f²)
//!                 classical   efficiency gain   efficiency loss
//! ```
//!
//! so the tuned estimator beats the classical mean exactly when the squared
//! covariance exceeds the error in estimating it. Cross-fitting halves the
//! split-sample MSE and adds a dependence term `(σ_{yf²} - 2σ_fy μ_f)²/(n²σ_f⁴)`
//! from reusing each fold twice. For Gaussian pairs the error collapses to
//! `(σ_fy² + σ_f²σ_y²)/(n-1)` and the improvement condition to a correlation
//! threshold `1/sqrt(c·n - 2)`; signed-binary labels admit a similar
//! closed-form condition. The single-sample estimator additionally carries an
//! exact finite-sample bias `(2σ_yf μ_f - σ_{yf²})/(nσ_f²)`.

use crate::error::{Error, Result};
use crate::moments::{JointMoments, GAUSSIAN_CONSISTENCY_TOL};
use serde::{Deserialize, Serialize};

/// Estimator variants covered by the closed-form results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodVariant {
    SplitSample,
    CrossFit,
    /// Single-sample estimator under jointly Gaussian labels (the only case
    /// with a tractable exact MSE).
    SingleSampleGaussian,
}

impl MethodVariant {
    pub fn label(&self) -> &'static str {
        match self {
            Self::SplitSample => "split-sample",
            Self::CrossFit => "cross-fit",
            Self::SingleSampleGaussian => "single-sample-gaussian",
        }
    }
}

/// What the `n` recorded in a [`TheoryReport`] counts.
///
/// The split-sample and cross-fit results are parameterized by the per-fold
/// size (the estimator consumes `2n` labels in total); the single-sample
/// result by the total sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleConvention {
    PerFold,
    TotalSamples,
}

/// Exact MSE decomposition for one estimator at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    /// MSE of the classical estimator on the same label budget.
    pub mse_classical: f64,
    /// Variance removed by exploiting the pseudo-label correlation.
    pub efficiency_gain: f64,
    /// Variance added by estimating that correlation from data (≥ 0).
    pub efficiency_loss: f64,
    /// `mse_classical - efficiency_gain + efficiency_loss`.
    pub mse_total: f64,
    pub method: MethodVariant,
    pub n: u64,
    pub n_convention: SampleConvention,
    /// Strictly better than classical (`efficiency_gain > efficiency_loss`);
    /// exact ties count as no improvement.
    pub improves: bool,
}

/// The signed-binary improvement condition at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryCondition {
    /// Exact necessary-and-sufficient verdict:
    /// `n/(n²-2) + A_n² < (ρ - A_n)²`.
    pub improves: bool,
    /// Sufficient correlation threshold `sqrt(n/(n²-2) + A_n²) - |A_n|`:
    /// `|ρ|` above it guarantees improvement.
    pub sufficient_threshold: f64,
    /// Imbalance term `A_n = (2(n-1)/(n²-2)) · μ_f μ_y / (σ_f σ_y)`.
    pub a_n: f64,
}

fn require_n_at_least(n: u64, min: u64) -> Result<f64> {
    if n < min {
        return Err(Error::InvalidSampleSize(format!(
            "need n >= {min}, got {n}"
        )));
    }
    Ok(n as f64)
}

fn require_var_f(m: &JointMoments) -> Result<f64> {
    if !(m.var_f > 0.0) {
        return Err(Error::DegenerateF(format!(
            "Var(F) must be positive, got {}",
            m.var_f
        )));
    }
    Ok(m.var_f)
}

/// `E[(σ̂_fy - σ_fy)²]` for the unbiased covariance on `n` pairs, arbitrary
/// joint law with bounded fourth moments.
pub fn cov_error_general(m: &JointMoments, n: u64) -> Result<f64> {
    let nf = require_n_at_least(n, 2)?;
    Ok(m.cov_y2f2 / nf + m.var_f * m.var_y / (nf - 1.0)
        - (nf - 2.0) / (nf * (nf - 1.0)) * m.cov_fy * m.cov_fy
        - 2.0 / nf * (m.cov_y2f * m.mu_f + m.cov_yf2 * m.mu_y - 2.0 * m.cov_fy * m.mu_f * m.mu_y))
}

/// `E[(σ̂_fy - σ_fy)²] = (σ_fy² + σ_f²σ_y²)/(n-1)` for jointly Gaussian pairs.
pub fn cov_error_gaussian(m: &JointMoments, n: u64) -> Result<f64> {
    let nf = require_n_at_least(n, 2)?;
    Ok((m.cov_fy * m.cov_fy + m.var_f * m.var_y) / (nf - 1.0))
}

/// Exact MSE of the split-sample estimator with per-fold size `n`.
pub fn mse_split_sample(m: &JointMoments, n: u64) -> Result<TheoryReport> {
    let nf = require_n_at_least(n, 2)?;
    let var_f = require_var_f(m)?;
    let mse_classical = m.var_y / nf;
    let efficiency_gain = m.cov_fy * m.cov_fy / (nf * var_f);
    let efficiency_loss = cov_error_general(m, n)? / (nf * var_f);
    Ok(TheoryReport {
        mse_classical,
        efficiency_gain,
        efficiency_loss,
        mse_total: mse_classical - efficiency_gain + efficiency_loss,
        method: MethodVariant::SplitSample,
        n,
        n_convention: SampleConvention::PerFold,
        improves: efficiency_gain > efficiency_loss,
    })
}

/// Exact MSE of the cross-fit estimator with per-fold size `n`
/// (`2n` labels in total, compared against the classical estimator on `2n`).
pub fn mse_cross_fit(m: &JointMoments, n_per_fold: u64) -> Result<TheoryReport> {
    let split = mse_split_sample(m, n_per_fold)?;
    let nf = n_per_fold as f64;
    let var_f = m.var_f;
    let dep_num = m.cov_yf2 - 2.0 * m.cov_fy * m.mu_f;
    let dependence = dep_num * dep_num / (nf * nf * var_f * var_f);
    let mse_classical = m.var_y / (2.0 * nf);
    let efficiency_gain = 0.5 * split.efficiency_gain;
    let efficiency_loss = 0.5 * (split.efficiency_loss + dependence);
    Ok(TheoryReport {
        mse_classical,
        efficiency_gain,
        efficiency_loss,
        mse_total: mse_classical - efficiency_gain + efficiency_loss,
        method: MethodVariant::CrossFit,
        n: n_per_fold,
        n_convention: SampleConvention::PerFold,
        improves: efficiency_gain > efficiency_loss,
    })
}

/// Exact MSE of the single-sample estimator on `n_total` jointly Gaussian
/// samples.
///
/// Only defined for Gaussian-consistent moments: the derivation leans on the
/// independence of the Gaussian sample mean and sample covariance, and no
/// general-distribution counterpart exists.
pub fn mse_single_sample_gaussian(m: &JointMoments, n_total: u64) -> Result<TheoryReport> {
    let nf = require_n_at_least(n_total, 3)?;
    let var_f = require_var_f(m)?;
    if !m.is_gaussian_consistent(GAUSSIAN_CONSISTENCY_TOL) {
        return Err(Error::NonGaussianMoments(
            "higher cross moments do not satisfy the Gaussian identities".into(),
        ));
    }
    let mse_classical = m.var_y / nf;
    let efficiency_gain = m.cov_fy * m.cov_fy / (nf * var_f);
    let cov_error = cov_error_gaussian(m, n_total)?;
    let efficiency_loss = cov_error / (nf * var_f);
    Ok(TheoryReport {
        mse_classical,
        efficiency_gain,
        efficiency_loss,
        mse_total: mse_classical - efficiency_gain + efficiency_loss,
        method: MethodVariant::SingleSampleGaussian,
        n: n_total,
        n_convention: SampleConvention::TotalSamples,
        improves: efficiency_gain > efficiency_loss,
    })
}

/// Correlation threshold `1/sqrt(c·n - 2)` above which `|ρ|` guarantees a
/// Gaussian-case improvement; `c = 2` for the single-sample estimator (`n`
/// counts fold-equivalents of a `2n` total) and `c = 1` for the per-fold
/// split/cross-fit conventions.
pub fn gaussian_threshold(n: u64, variant: MethodVariant) -> Result<f64> {
    let c: u64 = match variant {
        MethodVariant::SingleSampleGaussian => 2,
        MethodVariant::SplitSample | MethodVariant::CrossFit => 1,
    };
    let cn = c * n;
    if cn <= 2 {
        return Err(Error::NoImprovementPossible(format!(
            "threshold 1/sqrt(c·n - 2) undefined at c·n = {cn}; no correlation can help"
        )));
    }
    Ok(1.0 / ((cn - 2) as f64).sqrt())
}

/// Improvement condition for signed-binary labels at per-fold size `n`.
///
/// Uses the exact condition `n/(n²-2) + A_n² < (ρ - A_n)²`; the returned
/// threshold is the weaker sufficient bound on `|ρ|`.
pub fn binary_condition(m: &JointMoments, n: u64) -> Result<BinaryCondition> {
    let nf = require_n_at_least(n, 2)?;
    let var_f = require_var_f(m)?;
    if !(m.var_y > 0.0) {
        return Err(Error::DegenerateY(format!(
            "Var(Y) must be positive, got {}",
            m.var_y
        )));
    }
    let sd_prod = (var_f * m.var_y).sqrt();
    let a_n = 2.0 * (nf - 1.0) / (nf * nf - 2.0) * (m.mu_f * m.mu_y) / sd_prod;
    let rho = m.cov_fy / sd_prod;
    let base = nf / (nf * nf - 2.0);
    let lhs = base + a_n * a_n;
    let rhs = (rho - a_n) * (rho - a_n);
    Ok(BinaryCondition {
        improves: lhs < rhs,
        sufficient_threshold: lhs.sqrt() - a_n.abs(),
        a_n,
    })
}

/// Exact bias of the single-sample estimator:
/// `E[θ̂ - θ] = (2σ_yf μ_f - σ_{yf²})/(nσ_f²)`.
///
/// Vanishes for Gaussian pairs (where `σ_{yf²} = 2σ_yf μ_f`) and for
/// signed-binary labels with balanced pseudo-labels.
pub fn bias_single_sample(m: &JointMoments, n: u64) -> Result<f64> {
    let nf = require_n_at_least(n, 2)?;
    let var_f = require_var_f(m)?;
    Ok((2.0 * m.cov_fy * m.mu_f - m.cov_yf2) / (nf * var_f))
}

/// Smallest `n ≤ n_max` at which the variant improves on the classical
/// estimator, or `None` when no such size exists in range.
///
/// Scans `n` in the variant's own convention: per-fold size for
/// split/cross-fit (from 2), total sample size for the single-sample Gaussian
/// variant (from 3).
pub fn tipping_n(m: &JointMoments, variant: MethodVariant, n_max: u64) -> Result<Option<u64>> {
    let start = match variant {
        MethodVariant::SplitSample | MethodVariant::CrossFit => 2,
        MethodVariant::SingleSampleGaussian => 3,
    };
    for n in start..=n_max {
        let improves = match variant {
            MethodVariant::SplitSample => mse_split_sample(m, n)?.improves,
            MethodVariant::CrossFit => mse_cross_fit(m, n)?.improves,
            MethodVariant::SingleSampleGaussian => mse_single_sample_gaussian(m, n)?.improves,
        };
        if improves {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// MSE under independent `Y, F`: `(σ_y²/n)(1 + 1/(n-1))` for the
/// split-sample (per-fold `n`) and single-sample (total `n`) conventions,
/// and half that for cross-fit.
pub fn mse_independent(var_y: f64, n: u64, variant: MethodVariant) -> Result<f64> {
    let nf = require_n_at_least(n, 2)?;
    let split = var_y / nf * (1.0 + 1.0 / (nf - 1.0));
    Ok(match variant {
        MethodVariant::SplitSample | MethodVariant::SingleSampleGaussian => split,
        MethodVariant::CrossFit => 0.5 * split,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{
        discrete_moments, gaussian_moments, signed_binary_moments, SignedBinaryPmf,
    };
    use crate::oracle::DiscreteJointSpec;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn independent_unit() -> JointMoments {
        gaussian_moments(0.0, 0.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn cov_error_independent_case() {
        let v = cov_error_general(&independent_unit(), 5).unwrap();
        assert_relative_eq!(v, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn cov_error_gaussian_closed_form() {
        let m = gaussian_moments(0.0, 0.0, 1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(cov_error_general(&m, 5).unwrap(), 0.3125, max_relative = 1e-15);
        assert_relative_eq!(cov_error_gaussian(&m, 5).unwrap(), 0.3125, max_relative = 1e-15);
        let ind = independent_unit();
        assert_relative_eq!(cov_error_gaussian(&ind, 2).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn cov_error_general_specializes_to_gaussian() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..100 {
            let mu_y = rng.random_range(-2.0..2.0);
            let mu_f = rng.random_range(-2.0..2.0);
            let var_y = rng.random_range(0.1..3.0);
            let var_f = rng.random_range(0.1..3.0);
            let rho: f64 = rng.random_range(-0.95..0.95);
            let cov = rho * (var_y * var_f as f64).sqrt();
            let m = gaussian_moments(mu_y, mu_f, var_y, var_f, cov).unwrap();
            for n in [2, 3, 7, 25] {
                let general = cov_error_general(&m, n).unwrap();
                let special = cov_error_gaussian(&m, n).unwrap();
                assert!(
                    (general - special).abs() < 1e-12,
                    "n={n}: {general} vs {special}"
                );
            }
        }
    }

    #[test]
    fn split_sample_independent_factor() {
        let r = mse_split_sample(&independent_unit(), 2).unwrap();
        assert_relative_eq!(r.mse_total, 1.0, max_relative = 1e-15);
        assert!(!r.improves);
        let r = mse_split_sample(&independent_unit(), 11).unwrap();
        assert_relative_eq!(r.mse_total, 1.1 * r.mse_classical, max_relative = 1e-13);
    }

    #[test]
    fn split_sample_report_identity() {
        let m = gaussian_moments(0.3, -0.7, 2.0, 1.5, 0.9).unwrap();
        let r = mse_split_sample(&m, 6).unwrap();
        assert_eq!(
            r.mse_total,
            r.mse_classical - r.efficiency_gain + r.efficiency_loss
        );
        assert!(r.efficiency_loss >= 0.0);
    }

    #[test]
    fn cross_fit_independent_factor() {
        let r = mse_cross_fit(&independent_unit(), 2).unwrap();
        assert_relative_eq!(r.mse_total, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn cross_fit_balanced_binary_halves_split() {
        let pmf = SignedBinaryPmf::new(0.45, 0.05, 0.05, 0.45).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        for n in [2, 3, 5, 9] {
            let ss = mse_split_sample(&m, n).unwrap();
            let cf = mse_cross_fit(&m, n).unwrap();
            assert_relative_eq!(cf.mse_total, 0.5 * ss.mse_total, max_relative = 1e-14);
        }
    }

    #[test]
    fn single_sample_gaussian_independent_factor() {
        let r = mse_single_sample_gaussian(&independent_unit(), 20).unwrap();
        assert_relative_eq!(
            r.mse_total,
            (1.0 / 20.0) * (1.0 + 1.0 / 19.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn single_sample_improvement_flips_at_threshold() {
        // 2n = 20 total: threshold on |ρ| is 1/sqrt(18).
        let t = 1.0 / 18.0_f64.sqrt();
        let below = gaussian_moments(0.0, 0.0, 1.0, 1.0, t - 0.01).unwrap();
        let above = gaussian_moments(0.0, 0.0, 1.0, 1.0, t + 0.01).unwrap();
        assert!(!mse_single_sample_gaussian(&below, 20).unwrap().improves);
        assert!(mse_single_sample_gaussian(&above, 20).unwrap().improves);
    }

    #[test]
    fn single_sample_rejects_non_gaussian_moments() {
        let pmf = SignedBinaryPmf::new(0.3, 0.2, 0.1, 0.4).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        let err = mse_single_sample_gaussian(&m, 10).unwrap_err();
        assert!(matches!(err, Error::NonGaussianMoments(_)));
    }

    #[test]
    fn gaussian_threshold_values() {
        assert_relative_eq!(
            gaussian_threshold(11, MethodVariant::CrossFit).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-15
        );
        let t = gaussian_threshold(10, MethodVariant::SingleSampleGaussian).unwrap();
        assert!((t - 0.23570).abs() < 1e-5, "got {t}");
        let err = gaussian_threshold(2, MethodVariant::CrossFit).unwrap_err();
        assert!(matches!(err, Error::NoImprovementPossible(_)));
    }

    #[test]
    fn binary_condition_balanced() {
        let pmf = SignedBinaryPmf::new(0.45, 0.05, 0.05, 0.45).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        let c = binary_condition(&m, 10).unwrap();
        assert_eq!(c.a_n, 0.0);
        assert!((c.sufficient_threshold - 0.31944).abs() < 1e-5);
        // n = 2: threshold 1; |ρ| can never exceed it.
        let c2 = binary_condition(&m, 2).unwrap();
        assert_relative_eq!(c2.sufficient_threshold, 1.0, max_relative = 1e-15);
        assert!(!c2.improves);
    }

    #[test]
    fn binary_exact_condition_matches_general_verdict() {
        // The exact binary condition must agree with the sign of
        // σ_fy² - E[(σ̂-σ)²] from the general theorem.
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let raw: [f64; 4] = [
                rng.random_range(0.02..1.0),
                rng.random_range(0.02..1.0),
                rng.random_range(0.02..1.0),
                rng.random_range(0.02..1.0),
            ];
            let s: f64 = raw.iter().sum();
            let pmf = SignedBinaryPmf::new(raw[0] / s, raw[1] / s, raw[2] / s, raw[3] / s).unwrap();
            let m = signed_binary_moments(&pmf).unwrap();
            for n in 3..=10 {
                let cond = binary_condition(&m, n).unwrap();
                let gain_beats_loss =
                    cov_error_general(&m, n).unwrap() < m.cov_fy * m.cov_fy;
                assert_eq!(
                    cond.improves, gain_beats_loss,
                    "n={n}, pmf={pmf:?}"
                );
                // And the split-sample report must agree too.
                assert_eq!(
                    mse_split_sample(&m, n).unwrap().improves,
                    gain_beats_loss
                );
            }
        }
    }

    #[test]
    fn bias_vanishing_cases() {
        let pmf = SignedBinaryPmf::new(0.45, 0.05, 0.05, 0.45).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        assert_eq!(bias_single_sample(&m, 5).unwrap(), 0.0);
        let g = gaussian_moments(1.0, 2.0, 1.0, 1.0, 0.3).unwrap();
        assert!(bias_single_sample(&g, 5).unwrap().abs() < 1e-15);
    }

    #[test]
    fn bias_nonzero_discrete() {
        let spec = DiscreteJointSpec::new(
            vec![(0.0, 0.5), (1.0, -0.25), (2.0, 1.5)],
            vec![0.3, 0.45, 0.25],
        )
        .unwrap();
        let m = discrete_moments(&spec).unwrap();
        let b = bias_single_sample(&m, 2).unwrap();
        assert!(b != 0.0);
        assert_relative_eq!(
            b,
            (2.0 * m.cov_fy * m.mu_f - m.cov_yf2) / (2.0 * m.var_f),
            max_relative = 1e-15
        );
    }

    #[test]
    fn tipping_gaussian_one_third() {
        let m = gaussian_moments(0.0, 0.0, 1.0, 1.0, 1.0 / 3.0).unwrap();
        assert_eq!(tipping_n(&m, MethodVariant::CrossFit, 100).unwrap(), Some(12));
    }

    #[test]
    fn tipping_independent_never() {
        assert_eq!(
            tipping_n(&independent_unit(), MethodVariant::CrossFit, 500).unwrap(),
            None
        );
        assert_eq!(
            tipping_n(&independent_unit(), MethodVariant::SingleSampleGaussian, 500).unwrap(),
            None
        );
    }

    #[test]
    fn tipping_binary_half_correlation() {
        // Balanced signed binary with ρ = 0.5: first n with n/(n²-2) < 0.25.
        let pmf = SignedBinaryPmf::from_noise_rates(0.5, 0.75, 0.25).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        assert_relative_eq!(m.cov_fy, 0.5, max_relative = 1e-14);
        assert_eq!(tipping_n(&m, MethodVariant::SplitSample, 100).unwrap(), Some(5));
        assert_eq!(tipping_n(&m, MethodVariant::CrossFit, 100).unwrap(), Some(5));
    }

    #[test]
    fn independent_closed_form_matches_general() {
        let m = independent_unit();
        for n in [2, 3, 10, 40] {
            let split = mse_split_sample(&m, n).unwrap().mse_total;
            let cross = mse_cross_fit(&m, n).unwrap().mse_total;
            assert_relative_eq!(
                split,
                mse_independent(1.0, n, MethodVariant::SplitSample).unwrap(),
                max_relative = 1e-14
            );
            assert_relative_eq!(
                cross,
                mse_independent(1.0, n, MethodVariant::CrossFit).unwrap(),
                max_relative = 1e-14
            );
        }
        assert_relative_eq!(
            mse_independent(1.0, 2, MethodVariant::SplitSample).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            mse_independent(1.0, 2, MethodVariant::CrossFit).unwrap(),
            0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn worse_split_implies_worse_cross() {
        // Corollary: split worse than classical on n ⇒ cross-fit worse than
        // classical on 2n. Checked on random discrete specs.
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let spec = DiscreteJointSpec::new(
                vec![
                    (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    (rng.random_range(-1.0..1.0), rng.random_range(1.5..2.5)),
                    (rng.random_range(1.0..2.0), rng.random_range(-2.5..-1.5)),
                ],
                {
                    let raw: [f64; 3] = [
                        rng.random_range(0.05..1.0),
                        rng.random_range(0.05..1.0),
                        rng.random_range(0.05..1.0),
                    ];
                    let s: f64 = raw.iter().sum();
                    raw.iter().map(|x| x / s).collect()
                },
            )
            .unwrap();
            let m = discrete_moments(&spec).unwrap();
            for n in 2..=8 {
                let ss = mse_split_sample(&m, n).unwrap();
                let cf = mse_cross_fit(&m, n).unwrap();
                if ss.mse_total > m.var_y / n as f64 {
                    assert!(cf.mse_total > m.var_y / (2.0 * n as f64));
                }
                // Realizable moments always give nonnegative covariance error.
                assert!(cov_error_general(&m, n).unwrap() >= 0.0);
            }
        }
    }
}
