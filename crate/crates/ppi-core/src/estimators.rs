//! Point estimators, λ estimators, variance estimators, and confidence
//! intervals for prediction-powered mean estimation.
//!
//! All estimators target `θ = E[Y]`. The classical estimator averages labels;
//! the PPI family adds a pseudo-label correction `λ(f̄_pool - f̄_labeled)`,
//! with `λ` either pinned (0 for classical, 1 for PPI) or tuned from data.
//! In the infinite-pool regime the pool mean and variance of `F` are known
//! exactly and are passed as an [`InfinitePopulationF`]; the tuned coefficient
//! is then `λ̂ = σ̂_fy / σ_f²`. The single-sample variant estimates `λ̂` on the
//! same sample as the point estimate, the split-sample variant on a disjoint
//! fold, and the cross-fit variant averages the two split-sample estimates
//! with fold roles swapped.

use crate::error::{Error, Result};
use crate::moments::{mean, sample_cov, sample_variance};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Which estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodTag {
    Classical,
    Ppi,
    PpiPp,
    SingleSample,
    SplitSample,
    CrossFit,
}

impl MethodTag {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Ppi => "ppi",
            Self::PpiPp => "ppi-pp",
            Self::SingleSample => "single-sample",
            Self::SplitSample => "split-sample",
            Self::CrossFit => "cross-fit",
        }
    }
}

/// Size of the unlabeled pool backing an estimate. Serializes as a number or
/// the string `"infinite"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "UnlabeledCountRepr", into = "UnlabeledCountRepr")]
pub enum UnlabeledCount {
    Finite(u64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum UnlabeledCountRepr {
    Num(u64),
    Tag(String),
}

impl TryFrom<UnlabeledCountRepr> for UnlabeledCount {
    type Error = String;

    fn try_from(r: UnlabeledCountRepr) -> std::result::Result<Self, String> {
        match r {
            UnlabeledCountRepr::Num(n) => Ok(Self::Finite(n)),
            UnlabeledCountRepr::Tag(s) if s == "infinite" => Ok(Self::Infinite),
            UnlabeledCountRepr::Tag(s) => {
                Err(format!("n_unlabeled must be a count or \"infinite\", got \"{s}\""))
            }
        }
    }
}

impl From<UnlabeledCount> for UnlabeledCountRepr {
    fn from(c: UnlabeledCount) -> Self {
        match c {
            UnlabeledCount::Finite(n) => Self::Num(n),
            UnlabeledCount::Infinite => Self::Tag("infinite".into()),
        }
    }
}

/// Known pseudo-label population in the infinite-pool regime, where `μ_f` and
/// `σ_f²` are estimated with arbitrary precision from unlimited unlabeled
/// data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfinitePopulationF {
    pub mu_f: f64,
    /// Must be strictly positive; every tuned estimator divides by it.
    pub var_f: f64,
}

impl InfinitePopulationF {
    pub fn new(mu_f: f64, var_f: f64) -> Result<Self> {
        if !(var_f > 0.0) {
            return Err(Error::DegenerateF(format!(
                "population Var(F) must be positive, got {var_f}"
            )));
        }
        Ok(Self { mu_f, var_f })
    }

    fn check(&self) -> Result<()> {
        if !(self.var_f > 0.0) {
            return Err(Error::DegenerateF(format!(
                "population Var(F) must be positive, got {}",
                self.var_f
            )));
        }
        Ok(())
    }
}

/// A point estimate with the λ it used and optional variance/interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub theta_hat: f64,
    /// 0 for classical, 1 for PPI, the tuned `λ̂` otherwise.
    pub lambda_used: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
    pub method: MethodTag,
    pub n_labeled: u64,
    pub n_unlabeled: UnlabeledCount,
}

impl EstimateReport {
    /// Attach a symmetric normal-quantile interval at `level`, using the
    /// report's variance estimate. No-op when no variance is present.
    pub fn with_confidence_level(mut self, level: f64) -> Result<Self> {
        if let Some(v) = self.variance_estimate {
            let (lo, hi) = confidence_interval(self.theta_hat, v, level)?;
            self.ci_low = Some(lo);
            self.ci_high = Some(hi);
        }
        Ok(self)
    }
}

/// A variance estimate, floored at zero when the defining formula goes
/// negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    /// True when the raw formula was negative and the value was clamped.
    pub floored: bool,
}

impl VarianceEstimate {
    fn from_raw(raw: f64) -> Self {
        if raw < 0.0 {
            Self {
                value: 0.0,
                floored: true,
            }
        } else {
            Self {
                value: raw,
                floored: false,
            }
        }
    }
}

fn require_pairs(pairs: &[(f64, f64)], min: usize, what: &str) -> Result<()> {
    if pairs.len() < min {
        return Err(Error::InsufficientData(format!(
            "{what}: need at least {min} pairs, got {}",
            pairs.len()
        )));
    }
    Ok(())
}

fn ys(pairs: &[(f64, f64)]) -> Vec<f64> {
    pairs.iter().map(|p| p.0).collect()
}

fn fs(pairs: &[(f64, f64)]) -> Vec<f64> {
    pairs.iter().map(|p| p.1).collect()
}

/// Sample average of the labels, with the plug-in variance `σ̂_y²/n`
/// (requires two observations; absent for a single one).
pub fn classical(y_values: &[f64]) -> Result<EstimateReport> {
    if y_values.is_empty() {
        return Err(Error::InsufficientData("classical: empty sample".into()));
    }
    let n = y_values.len();
    let variance_estimate = if n >= 2 {
        Some(sample_variance(y_values) / n as f64)
    } else {
        None
    };
    Ok(EstimateReport {
        theta_hat: mean(y_values),
        lambda_used: 0.0,
        variance_estimate,
        ci_low: None,
        ci_high: None,
        method: MethodTag::Classical,
        n_labeled: n as u64,
        n_unlabeled: UnlabeledCount::Finite(0),
    })
}

/// The unweighted prediction-powered estimator:
/// `θ̂ = ȳ + f̄_unlabeled - f̄_labeled` (λ pinned to 1).
pub fn ppi(labeled: &[(f64, f64)], unlabeled_f: &[f64]) -> Result<EstimateReport> {
    require_pairs(labeled, 1, "ppi labeled sample")?;
    if unlabeled_f.is_empty() {
        return Err(Error::InsufficientData("ppi: empty unlabeled sample".into()));
    }
    let theta_hat = mean(&ys(labeled)) + mean(unlabeled_f) - mean(&fs(labeled));
    Ok(EstimateReport {
        theta_hat,
        lambda_used: 1.0,
        variance_estimate: None,
        ci_low: None,
        ci_high: None,
        method: MethodTag::Ppi,
        n_labeled: labeled.len() as u64,
        n_unlabeled: UnlabeledCount::Finite(unlabeled_f.len() as u64),
    })
}

/// Finite-pool tuned coefficient `λ̂ = Ĉov(Y,F) / ((1 + n/N) V̂ar(F))`, with
/// both sample statistics (`ddof = 1`) taken on the labeled sample.
pub fn lambda_hat_finite(labeled: &[(f64, f64)], n_unlabeled: u64) -> Result<f64> {
    require_pairs(labeled, 2, "lambda_hat_finite")?;
    if n_unlabeled == 0 {
        return Err(Error::InsufficientData(
            "lambda_hat_finite: empty unlabeled pool".into(),
        ));
    }
    let f_var = sample_variance(&fs(labeled));
    if f_var == 0.0 {
        return Err(Error::DegenerateF(
            "labeled sample variance of F is zero".into(),
        ));
    }
    let n = labeled.len() as f64;
    let ratio = n / n_unlabeled as f64;
    Ok(sample_cov(labeled) / ((1.0 + ratio) * f_var))
}

/// Finite-pool power-tuned estimator:
/// `θ̂ = ȳ + λ̂ (f̄_unlabeled - f̄_labeled)` with [`lambda_hat_finite`].
pub fn ppi_pp_finite(labeled: &[(f64, f64)], unlabeled_f: &[f64]) -> Result<EstimateReport> {
    if unlabeled_f.is_empty() {
        return Err(Error::InsufficientData(
            "ppi_pp_finite: empty unlabeled sample".into(),
        ));
    }
    let lambda = lambda_hat_finite(labeled, unlabeled_f.len() as u64)?;
    let theta_hat = mean(&ys(labeled)) + lambda * (mean(unlabeled_f) - mean(&fs(labeled)));
    Ok(EstimateReport {
        theta_hat,
        lambda_used: lambda,
        variance_estimate: None,
        ci_low: None,
        ci_high: None,
        method: MethodTag::PpiPp,
        n_labeled: labeled.len() as u64,
        n_unlabeled: UnlabeledCount::Finite(unlabeled_f.len() as u64),
    })
}

/// Single-sample infinite-pool estimator: `λ̂ = Ĉov(Y,F)/σ_f²` and
/// `θ̂ = ȳ + λ̂ (μ_f - f̄)`, both from the same labeled sample.
pub fn single_sample_ppi_pp(
    labeled: &[(f64, f64)],
    pop: &InfinitePopulationF,
) -> Result<EstimateReport> {
    require_pairs(labeled, 2, "single_sample_ppi_pp")?;
    pop.check()?;
    let lambda = sample_cov(labeled) / pop.var_f;
    let theta_hat = mean(&ys(labeled)) + lambda * (pop.mu_f - mean(&fs(labeled)));
    Ok(EstimateReport {
        theta_hat,
        lambda_used: lambda,
        variance_estimate: None,
        ci_low: None,
        ci_high: None,
        method: MethodTag::SingleSample,
        n_labeled: labeled.len() as u64,
        n_unlabeled: UnlabeledCount::Infinite,
    })
}

/// Split-sample infinite-pool estimator: `λ̂` from `fold_lambda` only,
/// `θ̂ = ȳ + λ̂ (μ_f - f̄)` over `fold_estimate` only.
pub fn split_sample_ppi_pp(
    fold_lambda: &[(f64, f64)],
    fold_estimate: &[(f64, f64)],
    pop: &InfinitePopulationF,
) -> Result<EstimateReport> {
    require_pairs(fold_lambda, 2, "split_sample_ppi_pp lambda fold")?;
    require_pairs(fold_estimate, 1, "split_sample_ppi_pp estimation fold")?;
    pop.check()?;
    let lambda = sample_cov(fold_lambda) / pop.var_f;
    let theta_hat =
        mean(&ys(fold_estimate)) + lambda * (pop.mu_f - mean(&fs(fold_estimate)));
    Ok(EstimateReport {
        theta_hat,
        lambda_used: lambda,
        variance_estimate: None,
        ci_low: None,
        ci_high: None,
        method: MethodTag::SplitSample,
        n_labeled: (fold_lambda.len() + fold_estimate.len()) as u64,
        n_unlabeled: UnlabeledCount::Infinite,
    })
}

/// Cross-fit estimator: the average of the two split-sample estimates with
/// fold roles swapped. Reports the mean of the two fold λ̂s as `lambda_used`.
pub fn cross_fit_ppi_pp(
    fold1: &[(f64, f64)],
    fold2: &[(f64, f64)],
    pop: &InfinitePopulationF,
) -> Result<EstimateReport> {
    require_pairs(fold1, 2, "cross_fit_ppi_pp fold 1")?;
    require_pairs(fold2, 2, "cross_fit_ppi_pp fold 2")?;
    let a = split_sample_ppi_pp(fold1, fold2, pop)?;
    let b = split_sample_ppi_pp(fold2, fold1, pop)?;
    Ok(EstimateReport {
        theta_hat: 0.5 * (a.theta_hat + b.theta_hat),
        lambda_used: 0.5 * (a.lambda_used + b.lambda_used),
        variance_estimate: None,
        ci_low: None,
        ci_high: None,
        method: MethodTag::CrossFit,
        n_labeled: (fold1.len() + fold2.len()) as u64,
        n_unlabeled: UnlabeledCount::Infinite,
    })
}

/// The optimistic plug-in variance of the single-sample estimator:
/// `(1/n)(σ̂_y² - σ̂_fy²/σ_f²)`.
///
/// Treating the data-dependent `λ̂` as fixed makes this strictly smaller than
/// the classical plug-in `σ̂_y²/n` whenever `σ̂_fy ≠ 0`, regardless of the
/// estimator's true variance.
pub fn variance_optimistic(
    labeled: &[(f64, f64)],
    pop: &InfinitePopulationF,
) -> Result<VarianceEstimate> {
    require_pairs(labeled, 2, "variance_optimistic")?;
    pop.check()?;
    let n = labeled.len() as f64;
    let cov = sample_cov(labeled);
    let raw = (sample_variance(&ys(labeled)) - cov * cov / pop.var_f) / n;
    Ok(VarianceEstimate::from_raw(raw))
}

/// The naive plug-in variance of the single-sample estimator in the
/// infinite-pool limit: `σ̂_y²/n - 2λ̂²σ_f²/n + λ̂²σ̂_f²[n]/n`, where
/// `σ̂_f²[n]` is the labeled-sample variance of `F`.
pub fn variance_naive_plugin(
    labeled: &[(f64, f64)],
    pop: &InfinitePopulationF,
) -> Result<VarianceEstimate> {
    require_pairs(labeled, 2, "variance_naive_plugin")?;
    pop.check()?;
    let n = labeled.len() as f64;
    let lambda = sample_cov(labeled) / pop.var_f;
    let f_var_n = sample_variance(&fs(labeled));
    let raw = (sample_variance(&ys(labeled)) - 2.0 * lambda * lambda * pop.var_f
        + lambda * lambda * f_var_n)
        / n;
    Ok(VarianceEstimate::from_raw(raw))
}

/// Plug-in variance of a PPI++ estimate with `λ` treated as fixed, in the
/// infinite-pool limit: `(σ̂_y² + λ²σ_f² - 2λσ̂_fy)/n` with the sample
/// statistics taken on `pairs`.
///
/// With `λ` estimated on an independent fold this is an unbiased estimate of
/// the fold estimator's variance; with `λ` from the same sample it collapses
/// to [`variance_optimistic`].
pub fn variance_lambda_fixed(
    pairs: &[(f64, f64)],
    lambda: f64,
    pop: &InfinitePopulationF,
) -> Result<VarianceEstimate> {
    require_pairs(pairs, 2, "variance_lambda_fixed")?;
    pop.check()?;
    let n = pairs.len() as f64;
    let raw = (sample_variance(&ys(pairs)) + lambda * lambda * pop.var_f
        - 2.0 * lambda * sample_cov(pairs))
        / n;
    Ok(VarianceEstimate::from_raw(raw))
}

/// Symmetric normal-quantile interval `θ̂ ± z_{(1+level)/2} √variance`.
pub fn confidence_interval(theta_hat: f64, variance_estimate: f64, level: f64) -> Result<(f64, f64)> {
    if !(variance_estimate >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "variance must be nonnegative, got {variance_estimate}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal is valid")
        .inverse_cdf(0.5 * (1.0 + level));
    let half = z * variance_estimate.sqrt();
    Ok((theta_hat - half, theta_hat + half))
}
