//! Exact brute-force expectation engine over finite discrete joint laws.
//!
//! For a pmf with support size `s` and a statistic of `m` sample pairs, the
//! expectation is a finite sum over all `s^m` ordered outcomes, each weighted
//! by its product probability. Computing that sum exactly (up to floating
//! point) gives ground truth against which every closed-form expression in
//! [`crate::theory`] can be checked to ~1e-12, with no Monte Carlo noise.
//!
//! The outcome space is partitioned into fixed-size chunks; each chunk is
//! accumulated with compensated (Neumaier) summation and chunk totals are
//! merged in index order, so results are bit-identical regardless of how many
//! workers process the chunks.

use crate::error::{Error, Result};
use crate::estimators::{self, InfinitePopulationF};
use crate::moments::{self, JointMoments, PMF_SUM_TOL};
use crate::theory;
use crate::threads;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hard cap on `support^(total pairs)` for a single enumeration.
pub const ENUMERATION_BUDGET: u64 = 100_000_000;

/// Outcomes per work chunk. Fixed so that chunk boundaries (and therefore
/// rounding) do not depend on the worker count.
const CHUNK: u64 = 1 << 14;

/// A finite joint pmf over `(y, f)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJointSpec {
    /// Distinct support points `(y, f)`.
    pub support: Vec<(f64, f64)>,
    /// Matching probabilities, summing to 1.
    pub probs: Vec<f64>,
}

impl DiscreteJointSpec {
    pub fn new(support: Vec<(f64, f64)>, probs: Vec<f64>) -> Result<Self> {
        let spec = Self { support, probs };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if self.support.len() != self.probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                self.support.len(),
                self.probs.len()
            )));
        }
        if self
            .probs
            .iter()
            .any(|&p| p < 0.0 || !p.is_finite())
        {
            return Err(Error::InvalidDistribution(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        if self
            .support
            .iter()
            .any(|&(y, f)| !y.is_finite() || !f.is_finite())
        {
            return Err(Error::InvalidDistribution(
                "support points must be finite".into(),
            ));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, expected 1 within {PMF_SUM_TOL:e}"
            )));
        }
        for i in 0..self.support.len() {
            for j in (i + 1)..self.support.len() {
                if self.support[i] == self.support[j] {
                    return Err(Error::InvalidDistribution(format!(
                        "duplicate support point {:?}",
                        self.support[i]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact population moments of this pmf.
    pub fn moments(&self) -> Result<JointMoments> {
        moments::discrete_moments(self)
    }

    /// The infinite-pool pseudo-label population implied by this pmf.
    ///
    /// Fails with `DegenerateF` when `Var(F) = 0`.
    pub fn population_f(&self) -> Result<InfinitePopulationF> {
        let m = self.moments()?;
        InfinitePopulationF::new(m.mu_f, m.var_f)
    }
}

/// Which estimator an `EstimatorMean` enumeration averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    SplitSample,
    CrossFit,
    SingleSample,
}

/// The statistic whose exact expectation is enumerated.
///
/// Fold conventions: `CovErrorSquared`, `SingleSampleBias`,
/// `SingleSampleSqErr`, and `EstimatorMean(SingleSample)` consume one sample
/// of `n` pairs. `SplitSampleSqErr` and `EstimatorMean(SplitSample)` consume
/// a λ-fold of `n` pairs plus an estimation fold of `n2` pairs (default `n`).
/// `CrossFitSqErr` and `EstimatorMean(CrossFit)` consume two folds of `n`
/// pairs each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleStatistic {
    /// `E[(σ̂_fy - σ_fy)²]` of the unbiased covariance estimator.
    CovErrorSquared,
    /// Squared error of the split-sample estimator against `θ`.
    SplitSampleSqErr,
    /// Squared error of the cross-fit estimator against `θ`.
    CrossFitSqErr,
    /// `E[θ̂_single] - θ`.
    SingleSampleBias,
    /// Squared error of the single-sample estimator against `θ`.
    SingleSampleSqErr,
    /// `E[θ̂]` for the given estimator.
    EstimatorMean(EstimatorKind),
}

impl OracleStatistic {
    /// Stable label used in tables and CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Self::CovErrorSquared => "cov_error_squared",
            Self::SplitSampleSqErr => "split_sample_sq_err",
            Self::CrossFitSqErr => "cross_fit_sq_err",
            Self::SingleSampleBias => "single_sample_bias",
            Self::SingleSampleSqErr => "single_sample_sq_err",
            Self::EstimatorMean(EstimatorKind::SplitSample) => "estimator_mean_split_sample",
            Self::EstimatorMean(EstimatorKind::CrossFit) => "estimator_mean_cross_fit",
            Self::EstimatorMean(EstimatorKind::SingleSample) => "estimator_mean_single_sample",
        }
    }

    fn takes_second_fold(&self) -> bool {
        matches!(
            self,
            Self::SplitSampleSqErr | Self::EstimatorMean(EstimatorKind::SplitSample)
        )
    }

    fn is_two_fold(&self) -> bool {
        self.takes_second_fold()
            || matches!(
                self,
                Self::CrossFitSqErr | Self::EstimatorMean(EstimatorKind::CrossFit)
            )
    }
}

/// Neumaier compensated summation: running sum plus a separate compensation
/// term, robust to cancellation between large intermediate terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn checked_outcome_count(support: usize, total_pairs: u64) -> Result<u64> {
    let mut count: u128 = 1;
    for _ in 0..total_pairs {
        count *= support as u128;
        if count > ENUMERATION_BUDGET as u128 {
            return Err(Error::EnumerationTooLarge(format!(
                "support {support} with {total_pairs} pairs exceeds the budget of {ENUMERATION_BUDGET} outcomes"
            )));
        }
    }
    Ok(count as u64)
}

/// Exact `Σ_outcomes weight(outcome) · stat(outcome)` over all ordered tuples
/// of `total_pairs` draws from `spec`.
///
/// The statistic sees the tuple as a slice of `(y, f)` pairs. Enumeration is
/// parallel over fixed chunks of the flat outcome index; the result does not
/// depend on the worker count.
pub fn enumerate_statistic<S>(
    spec: &DiscreteJointSpec,
    total_pairs: u64,
    stat: S,
) -> Result<f64>
where
    S: Fn(&[(f64, f64)]) -> f64 + Sync,
{
    spec.validate()?;
    if total_pairs == 0 {
        return Err(Error::InvalidSampleSize(
            "enumeration needs at least one pair".into(),
        ));
    }
    let s = spec.support.len();
    let total = checked_outcome_count(s, total_pairs)?;
    let m = total_pairs as usize;
    let n_chunks = total.div_ceil(CHUNK);

    let run_chunk = |c: u64| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(total);
        // Odometer over base-s digits, seeded from the chunk start.
        let mut digits = vec![0usize; m];
        let mut rem = start;
        for d in (0..m).rev() {
            digits[d] = (rem % s as u64) as usize;
            rem /= s as u64;
        }
        let mut pairs = vec![(0.0, 0.0); m];
        let mut acc = NeumaierSum::default();
        for t in start..end {
            let mut weight = 1.0;
            for (slot, &d) in pairs.iter_mut().zip(&digits) {
                *slot = spec.support[d];
                weight *= spec.probs[d];
            }
            acc.add(weight * stat(&pairs));
            if t + 1 < end {
                for d in (0..m).rev() {
                    digits[d] += 1;
                    if digits[d] < s {
                        break;
                    }
                    digits[d] = 0;
                }
            }
        }
        acc.total()
    };

    // Small outcome spaces skip the worker pool entirely; chunk boundaries
    // are fixed either way, so both paths produce identical sums.
    let chunk_totals: Vec<f64> = if n_chunks == 1 {
        vec![run_chunk(0)]
    } else {
        let pool = threads::build_pool(threads::env_thread_cap());
        pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect())
    };

    let mut acc = NeumaierSum::default();
    for x in chunk_totals {
        acc.add(x);
    }
    Ok(acc.total())
}

/// Exact expectation of `stat` under `n` (plus `n2` where applicable) draws
/// from `spec`.
///
/// `n2` is only accepted for the split-sample statistics, where it sets the
/// estimation-fold size (default `n`).
pub fn enumerate_expectation(
    spec: &DiscreteJointSpec,
    n: u64,
    stat: OracleStatistic,
    n2: Option<u64>,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidSampleSize(format!(
            "statistic {} divides by n-1; need n >= 2, got {n}",
            stat.label()
        )));
    }
    if n2.is_some() && !stat.takes_second_fold() {
        return Err(Error::InvalidSampleSize(format!(
            "statistic {} does not take a second fold size",
            stat.label()
        )));
    }
    let n2 = n2.unwrap_or(n);
    if stat.takes_second_fold() && n2 < 1 {
        return Err(Error::InvalidSampleSize(
            "estimation fold must be nonempty".into(),
        ));
    }

    let mom = spec.moments()?;
    let theta = mom.mu_y;
    let total_pairs = if stat.is_two_fold() { n + n2 } else { n };
    let n = n as usize;

    if stat == OracleStatistic::CovErrorSquared {
        return enumerate_statistic(spec, total_pairs, |pairs| {
            let d = moments::sample_cov(pairs) - mom.cov_fy;
            d * d
        });
    }
    let pop = spec.population_f()?;

    match stat {
        OracleStatistic::CovErrorSquared => unreachable!("handled above"),
        OracleStatistic::SplitSampleSqErr => enumerate_statistic(spec, total_pairs, |pairs| {
            let est = estimators::split_sample_ppi_pp(&pairs[..n], &pairs[n..], &pop)
                .expect("folds validated before enumeration");
            let d = est.theta_hat - theta;
            d * d
        }),
        OracleStatistic::CrossFitSqErr => enumerate_statistic(spec, total_pairs, |pairs| {
            let est = estimators::cross_fit_ppi_pp(&pairs[..n], &pairs[n..], &pop)
                .expect("folds validated before enumeration");
            let d = est.theta_hat - theta;
            d * d
        }),
        OracleStatistic::SingleSampleBias => enumerate_statistic(spec, total_pairs, |pairs| {
            let est = estimators::single_sample_ppi_pp(pairs, &pop)
                .expect("sample validated before enumeration");
            est.theta_hat - theta
        }),
        OracleStatistic::SingleSampleSqErr => enumerate_statistic(spec, total_pairs, |pairs| {
            let est = estimators::single_sample_ppi_pp(pairs, &pop)
                .expect("sample validated before enumeration");
            let d = est.theta_hat - theta;
            d * d
        }),
        OracleStatistic::EstimatorMean(kind) => enumerate_statistic(spec, total_pairs, |pairs| {
            let est = match kind {
                EstimatorKind::SplitSample => {
                    estimators::split_sample_ppi_pp(&pairs[..n], &pairs[n..], &pop)
                }
                EstimatorKind::CrossFit => {
                    estimators::cross_fit_ppi_pp(&pairs[..n], &pairs[n..], &pop)
                }
                EstimatorKind::SingleSample => estimators::single_sample_ppi_pp(pairs, &pop),
            };
            est.expect("folds validated before enumeration").theta_hat
        }),
    }
}

/// One comparison row produced by [`oracle_theory_suite`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteRow {
    pub n: u64,
    pub statistic: String,
    pub oracle_value: f64,
    /// Closed-form value, absent where the theory defines none (the general
    /// single-sample squared error has no closed form).
    pub formula_value: Option<f64>,
    pub abs_diff: Option<f64>,
}

/// Enumerates every oracle statistic over `n_values` and compares each
/// against its closed-form counterpart.
///
/// Per `n` the suite emits `CovErrorSquared`, `SplitSampleSqErr`,
/// `CrossFitSqErr`, `SingleSampleBias`, `SingleSampleSqErr`, and
/// `EstimatorMean` for all three estimators. The formula column holds
/// the matching theory value: the covariance-error expression, the
/// split/cross-fit MSE, the single-sample bias, and the population mean
/// (plus bias, for the single-sample estimator mean).
pub fn oracle_theory_suite(spec: &DiscreteJointSpec, n_values: &[u64]) -> Result<Vec<SuiteRow>> {
    let mom = spec.moments()?;
    let theta = mom.mu_y;
    let mut rows = Vec::new();
    for &n in n_values {
        // No closed form exists for the single-sample squared error outside
        // the truly Gaussian case, which a finite pmf never is (matching
        // higher moments is not enough: the derivation needs the Gaussian
        // independence of sample mean and sample covariance). The oracle
        // value is still reported, with an empty formula column.
        let single_sq_formula = None;
        let entries: Vec<(OracleStatistic, Option<f64>)> = vec![
            (
                OracleStatistic::CovErrorSquared,
                Some(theory::cov_error_general(&mom, n)?),
            ),
            (
                OracleStatistic::SplitSampleSqErr,
                Some(theory::mse_split_sample(&mom, n)?.mse_total),
            ),
            (
                OracleStatistic::CrossFitSqErr,
                Some(theory::mse_cross_fit(&mom, n)?.mse_total),
            ),
            (
                OracleStatistic::SingleSampleBias,
                Some(theory::bias_single_sample(&mom, n)?),
            ),
            (OracleStatistic::SingleSampleSqErr, single_sq_formula),
            (
                OracleStatistic::EstimatorMean(EstimatorKind::SplitSample),
                Some(theta),
            ),
            (
                OracleStatistic::EstimatorMean(EstimatorKind::CrossFit),
                Some(theta),
            ),
            (
                OracleStatistic::EstimatorMean(EstimatorKind::SingleSample),
                Some(theta + theory::bias_single_sample(&mom, n)?),
            ),
        ];
        for (stat, formula_value) in entries {
            let oracle_value = enumerate_expectation(spec, n, stat, None)?;
            rows.push(SuiteRow {
                n,
                statistic: stat.label().to_string(),
                oracle_value,
                formula_value,
                abs_diff: formula_value.map(|f| (oracle_value - f).abs()),
            });
        }
    }
    Ok(rows)
}
