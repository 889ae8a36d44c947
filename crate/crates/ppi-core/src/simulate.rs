//! Seeded Monte Carlo experiments: relative-MSE-vs-n curves, coverage and
//! interval-width comparisons, and bootstrap experiments on ingested
//! datasets.
//!
//! Determinism: trial `t` draws its data from stream `t` of the configured
//! seed (streams reset per `n`, so the same trial index sees prefix-shared
//! data across sample sizes). Trials are processed in fixed-size chunks,
//! chunk aggregates are merged in index order, and floats are serialized
//! with shortest-round-trip formatting — so a run is byte-identical for a
//! given config regardless of the worker count.

use crate::distributions::{
    bootstrap_split, sample_pairs, streams, Dataset, DistributionSpec, LabelEncoding, NoiseModel,
    SeedSpec,
};
use crate::error::{Error, Result};
use crate::estimators::{self, InfinitePopulationF};
use crate::moments::JointMoments;
use crate::oracle::NeumaierSum;
use crate::theory;
use crate::threads;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Trials per work chunk; fixed so aggregation order never depends on the
/// worker count.
const TRIAL_CHUNK: u64 = 1024;

/// Which summary the run produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    Mse,
    Coverage,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Mse => "mse",
            Self::Coverage => "coverage",
        }
    }
}

/// Variance estimator attached to the single-sample method when intervals
/// are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingleSampleVariance {
    Optimistic,
    NaivePlugin,
}

/// A method entry in an experiment configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SimMethod {
    Classical,
    SingleSample { variance: SingleSampleVariance },
    SplitSample,
    CrossFit,
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Classical => "classical",
            Self::SingleSample {
                variance: SingleSampleVariance::Optimistic,
            } => "single-sample:optimistic",
            Self::SingleSample {
                variance: SingleSampleVariance::NaivePlugin,
            } => "single-sample:naive",
            Self::SplitSample => "split-sample",
            Self::CrossFit => "cross-fit",
        };
        f.write_str(s)
    }
}

impl FromStr for SimMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classical" => Self::Classical,
            "single-sample" | "single-sample:optimistic" => Self::SingleSample {
                variance: SingleSampleVariance::Optimistic,
            },
            "single-sample:naive" => Self::SingleSample {
                variance: SingleSampleVariance::NaivePlugin,
            },
            "split-sample" => Self::SplitSample,
            "cross-fit" => Self::CrossFit,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown method '{other}' (expected classical, single-sample[:optimistic|:naive], split-sample, or cross-fit)"
                )))
            }
        })
    }
}

impl TryFrom<String> for SimMethod {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SimMethod> for String {
    fn from(m: SimMethod) -> Self {
        m.to_string()
    }
}

/// How the configured `n` values are interpreted by the fold-based methods.
///
/// `Total` (the default): `n` is the total labeled budget for every method;
/// split/cross-fit require it even and use folds of `n/2`. `PerFold`: `n` is
/// the per-fold size for split/cross-fit (which then consume `2n` labels),
/// matching the per-fold parameterization of the theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NConvention {
    #[default]
    Total,
    PerFold,
}

/// Ground-truth target: the spec's own mean or an explicit override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrueThetaRepr", into = "TrueThetaRepr")]
pub enum TrueTheta {
    FromSpec,
    Value(f64),
}

impl Default for TrueTheta {
    fn default() -> Self {
        Self::FromSpec
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TrueThetaRepr {
    Num(f64),
    Tag(String),
}

impl TryFrom<TrueThetaRepr> for TrueTheta {
    type Error = Error;

    fn try_from(r: TrueThetaRepr) -> Result<Self> {
        match r {
            TrueThetaRepr::Num(v) => Ok(Self::Value(v)),
            TrueThetaRepr::Tag(s) if s == "from-spec" => Ok(Self::FromSpec),
            TrueThetaRepr::Tag(s) => Err(Error::InvalidConfig(format!(
                "true_theta must be a number or \"from-spec\", got \"{s}\""
            ))),
        }
    }
}

impl From<TrueTheta> for TrueThetaRepr {
    fn from(t: TrueTheta) -> Self {
        match t {
            TrueTheta::FromSpec => Self::Tag("from-spec".into()),
            TrueTheta::Value(v) => Self::Num(v),
        }
    }
}

/// Dataset source for bootstrap experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// CSV with header columns `y` and `f`.
    pub path: PathBuf,
    /// Binary encoding of the columns; `zero-one` data is affinely mapped to
    /// `{-1,+1}` at load so the signed-binary theory applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<LabelEncoding>,
    /// Regenerate the pseudo-label column from the labels with this noise
    /// model; absent means "use the f column as shipped".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
}

fn default_ci_level() -> f64 {
    0.95
}

/// Full experiment description (serializable as JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentKind,
    /// Generative spec (exactly one of `spec` / `dataset`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DistributionSpec>,
    /// Bootstrap dataset source (exactly one of `spec` / `dataset`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetConfig>,
    pub methods: Vec<SimMethod>,
    pub n_values: Vec<u64>,
    #[serde(default)]
    pub n_convention: NConvention,
    pub trials: u64,
    pub seed: SeedSpec,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[serde(default)]
    pub true_theta: TrueTheta,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(json)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec.is_some() == self.dataset.is_some() {
            return Err(Error::InvalidConfig(
                "exactly one of `spec` and `dataset` must be set".into(),
            ));
        }
        if let Some(spec) = &self.spec {
            spec.validate()?;
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("methods must be nonempty".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::InvalidConfig("n_values must be nonempty".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if self.dataset.is_some() && self.true_theta != TrueTheta::FromSpec {
            return Err(Error::InvalidConfig(
                "bootstrap experiments pin true_theta to the full-dataset mean; remove the override"
                    .into(),
            ));
        }
        for &n in &self.n_values {
            for method in &self.methods {
                method_shape(*method, n, self.n_convention)?;
            }
        }
        Ok(())
    }
}

/// Aggregated results for one `(method, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub n: u64,
    pub empirical_mse: f64,
    /// Standard error of `empirical_mse`: sample standard deviation of the
    /// per-trial squared errors divided by `sqrt(trials)`.
    pub mse_stderr: f64,
    pub empirical_bias: f64,
    pub coverage: Option<f64>,
    pub mean_ci_width: Option<f64>,
    pub theory_mse: Option<f64>,
}

/// Results of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub experiment: String,
    pub true_theta: f64,
    pub trials: u64,
    pub ci_level: Option<f64>,
    pub rows: Vec<SummaryRow>,
}

impl SimulationSummary {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Plot-ready CSV with the fixed column set
    /// `method,n,empirical_mse,mse_stderr,theory_mse,coverage,mean_ci_width`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,n,empirical_mse,mse_stderr,theory_mse,coverage,mean_ci_width\n");
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.method,
                row.n,
                row.empirical_mse,
                row.mse_stderr,
                cell(row.theory_mse),
                cell(row.coverage),
                cell(row.mean_ci_width),
            ));
        }
        out
    }

    /// Row lookup by canonical method label and configured n.
    pub fn row(&self, method: &str, n: u64) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method && r.n == n)
    }
}

/// Per-method sample geometry at one configured `n`.
#[derive(Debug, Clone, Copy)]
struct MethodShape {
    /// Labels the method consumes from the trial draw.
    draws: usize,
    /// Per-fold size for fold-based methods, total size otherwise.
    size: usize,
}

fn method_shape(method: SimMethod, n: u64, convention: NConvention) -> Result<MethodShape> {
    let n = n as usize;
    match method {
        SimMethod::Classical => {
            if n < 1 {
                return Err(Error::InvalidConfig("classical needs n >= 1".into()));
            }
            Ok(MethodShape { draws: n, size: n })
        }
        SimMethod::SingleSample { .. } => {
            if n < 2 {
                return Err(Error::InvalidConfig(format!(
                    "single-sample needs n >= 2, got {n}"
                )));
            }
            Ok(MethodShape { draws: n, size: n })
        }
        SimMethod::SplitSample | SimMethod::CrossFit => {
            let fold = match convention {
                NConvention::Total => {
                    if n % 2 != 0 {
                        return Err(Error::InvalidConfig(format!(
                            "{method} needs an even total labeled size, got {n}"
                        )));
                    }
                    n / 2
                }
                NConvention::PerFold => n,
            };
            if fold < 2 {
                return Err(Error::InvalidConfig(format!(
                    "{method} needs folds of at least 2 (got fold size {fold})"
                )));
            }
            Ok(MethodShape {
                draws: 2 * fold,
                size: fold,
            })
        }
    }
}

/// Per-trial evaluation of one method: the point estimate plus, when
/// requested, an interval.
fn evaluate_method(
    method: SimMethod,
    shape: MethodShape,
    data: &[(f64, f64)],
    pop: &InfinitePopulationF,
    ci_level: Option<f64>,
) -> Result<(f64, Option<(f64, f64)>)> {
    let slice = &data[..shape.draws];
    let (theta_hat, variance) = match method {
        SimMethod::Classical => {
            let ys: Vec<f64> = slice.iter().map(|p| p.0).collect();
            let report = estimators::classical(&ys)?;
            (report.theta_hat, report.variance_estimate)
        }
        SimMethod::SingleSample { variance } => {
            let report = estimators::single_sample_ppi_pp(slice, pop)?;
            let v = if ci_level.is_some() {
                Some(match variance {
                    SingleSampleVariance::Optimistic => {
                        estimators::variance_optimistic(slice, pop)?.value
                    }
                    SingleSampleVariance::NaivePlugin => {
                        estimators::variance_naive_plugin(slice, pop)?.value
                    }
                })
            } else {
                None
            };
            (report.theta_hat, v)
        }
        SimMethod::SplitSample => {
            let (lam_fold, est_fold) = slice.split_at(shape.size);
            let report = estimators::split_sample_ppi_pp(lam_fold, est_fold, pop)?;
            let v = if ci_level.is_some() {
                Some(
                    estimators::variance_lambda_fixed(est_fold, report.lambda_used, pop)?.value,
                )
            } else {
                None
            };
            (report.theta_hat, v)
        }
        SimMethod::CrossFit => {
            let (fold1, fold2) = slice.split_at(shape.size);
            let report = estimators::cross_fit_ppi_pp(fold1, fold2, pop)?;
            let v = if ci_level.is_some() {
                let a = estimators::split_sample_ppi_pp(fold1, fold2, pop)?;
                let b = estimators::split_sample_ppi_pp(fold2, fold1, pop)?;
                let va = estimators::variance_lambda_fixed(fold2, a.lambda_used, pop)?.value;
                let vb = estimators::variance_lambda_fixed(fold1, b.lambda_used, pop)?.value;
                Some(0.25 * (va + vb))
            } else {
                None
            };
            (report.theta_hat, v)
        }
    };
    let ci = match (ci_level, variance) {
        (Some(level), Some(v)) => Some(estimators::confidence_interval(theta_hat, v, level)?),
        _ => None,
    };
    Ok((theta_hat, ci))
}

#[derive(Debug, Clone, Copy, Default)]
struct CellAggregate {
    sq_err: NeumaierSum,
    sq_err_sq: NeumaierSum,
    err: NeumaierSum,
    width: NeumaierSum,
    covered: u64,
}

impl CellAggregate {
    fn record(&mut self, err: f64, ci: Option<(f64, f64)>, theta: f64) {
        let q = err * err;
        self.sq_err.add(q);
        self.sq_err_sq.add(q * q);
        self.err.add(err);
        if let Some((lo, hi)) = ci {
            self.width.add(hi - lo);
            if lo <= theta && theta <= hi {
                self.covered += 1;
            }
        }
    }
}

enum Source<'a> {
    Spec(&'a DistributionSpec),
    Dataset(&'a Dataset),
}

impl Source<'_> {
    fn moments(&self) -> Result<JointMoments> {
        match self {
            Self::Spec(spec) => spec.moments(),
            Self::Dataset(data) => crate::moments::empirical_moments(
                &data.pairs,
                crate::moments::EmpiricalMomentOptions::default(),
            ),
        }
    }

    fn population_f(&self) -> Result<InfinitePopulationF> {
        match self {
            Self::Spec(spec) => spec.population_f(),
            Self::Dataset(data) => data.population_f(),
        }
    }

    fn theta(&self, requested: TrueTheta) -> Result<f64> {
        match (self, requested) {
            (_, TrueTheta::Value(v)) => Ok(v),
            (Self::Spec(spec), TrueTheta::FromSpec) => spec.true_theta(),
            (Self::Dataset(data), TrueTheta::FromSpec) => Ok(data.mean_y()),
        }
    }

    fn draw(&self, n: usize, seed: &SeedSpec, stream: u64) -> Result<Vec<(f64, f64)>> {
        match self {
            Self::Spec(spec) => sample_pairs(spec, n, seed, stream),
            Self::Dataset(data) => Ok(bootstrap_split(data, n, seed, stream)?.0),
        }
    }
}

fn theory_mse_for(
    method: SimMethod,
    shape: MethodShape,
    m: &JointMoments,
) -> Option<f64> {
    match method {
        SimMethod::Classical => Some(m.var_y / shape.size as f64),
        SimMethod::SingleSample { .. } => {
            theory::mse_single_sample_gaussian(m, shape.size as u64)
                .ok()
                .map(|r| r.mse_total)
        }
        SimMethod::SplitSample => theory::mse_split_sample(m, shape.size as u64)
            .ok()
            .map(|r| r.mse_total),
        SimMethod::CrossFit => theory::mse_cross_fit(m, shape.size as u64)
            .ok()
            .map(|r| r.mse_total),
    }
}

fn run_experiment(
    source: &Source<'_>,
    cfg: &ExperimentConfig,
    with_ci: bool,
    threads: usize,
) -> Result<SimulationSummary> {
    cfg.validate()?;
    if with_ci {
        for (&n, method) in cfg
            .n_values
            .iter()
            .flat_map(|n| cfg.methods.iter().map(move |m| (n, m)))
        {
            if matches!(method, SimMethod::Classical) && n < 2 {
                return Err(Error::InvalidConfig(
                    "coverage experiments need n >= 2 for the classical variance".into(),
                ));
            }
        }
    }
    let theta = source.theta(cfg.true_theta)?;
    let pop = source.population_f()?;
    let mom = source.moments()?;
    let ci_level = with_ci.then_some(cfg.ci_level);
    let trials = cfg.trials;
    let n_chunks = trials.div_ceil(TRIAL_CHUNK);
    let pool = threads::build_pool(threads);

    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        let shapes: Vec<MethodShape> = cfg
            .methods
            .iter()
            .map(|&m| method_shape(m, n, cfg.n_convention))
            .collect::<Result<_>>()?;
        let max_draw = shapes.iter().map(|s| s.draws).max().unwrap();
        if let Source::Dataset(data) = source {
            if max_draw >= data.len() {
                return Err(Error::InsufficientData(format!(
                    "n = {n} needs {max_draw} labeled rows but the dataset has only {} (the remainder must stay unlabeled)",
                    data.len()
                )));
            }
        }

        let chunk_results: Vec<Result<Vec<CellAggregate>>> = pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let start = c * TRIAL_CHUNK;
                    let end = (start + TRIAL_CHUNK).min(trials);
                    let mut aggs = vec![CellAggregate::default(); cfg.methods.len()];
                    for trial in start..end {
                        let data = source.draw(max_draw, &cfg.seed, streams::trial(trial))?;
                        for ((method, shape), agg) in
                            cfg.methods.iter().zip(&shapes).zip(aggs.iter_mut())
                        {
                            let (theta_hat, ci) =
                                evaluate_method(*method, *shape, &data, &pop, ci_level)?;
                            agg.record(theta_hat - theta, ci, theta);
                        }
                    }
                    Ok(aggs)
                })
                .collect()
        });

        // Merge chunk totals in chunk order.
        let mut totals = vec![
            (
                NeumaierSum::default(),
                NeumaierSum::default(),
                NeumaierSum::default(),
                NeumaierSum::default(),
                0u64,
            );
            cfg.methods.len()
        ];
        for chunk in chunk_results {
            for (t, a) in totals.iter_mut().zip(chunk?) {
                t.0.add(a.sq_err.total());
                t.1.add(a.sq_err_sq.total());
                t.2.add(a.err.total());
                t.3.add(a.width.total());
                t.4 += a.covered;
            }
        }

        for ((method, shape), t) in cfg.methods.iter().zip(&shapes).zip(&totals) {
            let tf = trials as f64;
            let mean_q = t.0.total() / tf;
            let mse_stderr = if trials >= 2 {
                let var_q = (t.1.total() - tf * mean_q * mean_q).max(0.0) / (tf - 1.0);
                (var_q / tf).sqrt()
            } else {
                0.0
            };
            rows.push(SummaryRow {
                method: method.to_string(),
                n,
                empirical_mse: mean_q,
                mse_stderr,
                empirical_bias: t.2.total() / tf,
                coverage: with_ci.then(|| t.4 as f64 / tf),
                mean_ci_width: with_ci.then(|| t.3.total() / tf),
                theory_mse: theory_mse_for(*method, *shape, &mom),
            });
        }
    }

    Ok(SimulationSummary {
        experiment: if with_ci {
            ExperimentKind::Coverage.label().to_string()
        } else {
            ExperimentKind::Mse.label().to_string()
        },
        true_theta: theta,
        trials,
        ci_level: with_ci.then_some(cfg.ci_level),
        rows,
    })
}

fn require_spec<'a>(cfg: &'a ExperimentConfig) -> Result<&'a DistributionSpec> {
    cfg.spec
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("this runner needs an inline `spec`".into()))
}

/// Relative-MSE experiment: per trial, draw labeled data, evaluate every
/// configured method, and aggregate squared errors against the true mean.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<SimulationSummary> {
    run_mse_experiment_with_threads(cfg, threads::env_thread_cap())
}

pub fn run_mse_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<SimulationSummary> {
    run_experiment(&Source::Spec(require_spec(cfg)?), cfg, false, threads)
}

/// Coverage experiment: additionally build each method's interval per trial
/// and report empirical coverage of the true mean plus mean interval width.
pub fn run_coverage_experiment(cfg: &ExperimentConfig) -> Result<SimulationSummary> {
    run_coverage_experiment_with_threads(cfg, threads::env_thread_cap())
}

pub fn run_coverage_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<SimulationSummary> {
    run_experiment(&Source::Spec(require_spec(cfg)?), cfg, true, threads)
}

/// Bootstrap experiment on a loaded dataset: ground truth is the full-dataset
/// label mean, the pseudo-label population comes from the full dataset, and
/// each trial samples its labeled subset without replacement.
///
/// With a noise model, the pseudo-label column is regenerated once (stream
/// [`streams::NOISE`]) before any trials run; without one the dataset's `f`
/// column is used as shipped.
pub fn run_bootstrap_experiment(
    dataset: &Dataset,
    noise: Option<&NoiseModel>,
    cfg: &ExperimentConfig,
) -> Result<SimulationSummary> {
    run_bootstrap_experiment_with_threads(dataset, noise, cfg, threads::env_thread_cap())
}

pub fn run_bootstrap_experiment_with_threads(
    dataset: &Dataset,
    noise: Option<&NoiseModel>,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<SimulationSummary> {
    let prepared = match noise {
        Some(model) => dataset.with_noise_pseudo_labels(model, &cfg.seed, streams::NOISE)?,
        None => dataset.clone(),
    };
    run_experiment(
        &Source::Dataset(&prepared),
        cfg,
        matches!(cfg.experiment, ExperimentKind::Coverage),
        threads,
    )
}

/// Dispatch a parsed config to the right runner, loading the dataset when one
/// is configured.
pub fn run_from_config(cfg: &ExperimentConfig) -> Result<SimulationSummary> {
    run_from_config_with_threads(cfg, threads::env_thread_cap())
}

pub fn run_from_config_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<SimulationSummary> {
    cfg.validate()?;
    if let Some(ds) = &cfg.dataset {
        let mut data = Dataset::from_csv_path(&ds.path)?;
        if ds.labels == Some(LabelEncoding::ZeroOne) {
            data = data.to_pm1()?;
        }
        return run_bootstrap_experiment_with_threads(&data, ds.noise.as_ref(), cfg, threads);
    }
    match cfg.experiment {
        ExperimentKind::Mse => run_mse_experiment_with_threads(cfg, threads),
        ExperimentKind::Coverage => run_coverage_experiment_with_threads(cfg, threads),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_cfg() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::Mse,
            spec: Some(DistributionSpec::GaussianJoint {
                mu_y: 0.0,
                mu_f: 0.0,
                var_y: 1.0,
                var_f: 1.0,
                cov_fy: 0.5,
            }),
            dataset: None,
            methods: vec![SimMethod::Classical, SimMethod::CrossFit],
            n_values: vec![10],
            n_convention: NConvention::Total,
            trials: 2000,
            seed: SeedSpec::new(7),
            ci_level: 0.95,
            true_theta: TrueTheta::FromSpec,
        }
    }

    #[test]
    fn config_json_round_trip() {
        let json = r#"{
            "experiment": "coverage",
            "spec": {"type": "gaussian", "mu_y": 0.0, "mu_f": 0.0, "var_y": 1.0, "var_f": 1.0, "cov_fy": 0.3},
            "methods": ["classical", "single-sample:naive", "cross-fit"],
            "n_values": [10, 20],
            "trials": 100,
            "seed": 42,
            "ci_level": 0.9
        }"#;
        let cfg = ExperimentConfig::from_json(json).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Coverage);
        assert_eq!(cfg.methods.len(), 3);
        assert_eq!(cfg.n_convention, NConvention::Total);
        assert_eq!(cfg.true_theta, TrueTheta::FromSpec);
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_bad_shapes() {
        let mut cfg = gaussian_cfg();
        cfg.n_values = vec![9]; // odd total with cross-fit
        assert!(cfg.validate().is_err());
        let mut cfg = gaussian_cfg();
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = gaussian_cfg();
        cfg.spec = None;
        assert!(cfg.validate().is_err());
        let mut cfg = gaussian_cfg();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_method_is_rejected() {
        let err = "frobnicate".parse::<SimMethod>().unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn runs_are_deterministic_across_thread_counts() {
        let cfg = gaussian_cfg();
        let a = run_mse_experiment_with_threads(&cfg, 1).unwrap();
        let b = run_mse_experiment_with_threads(&cfg, 4).unwrap();
        let c = run_mse_experiment_with_threads(&cfg, 3).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json().unwrap(), c.to_json().unwrap());
    }

    #[test]
    fn harness_estimates_match_estimators_modul_on_same_draws() {
        // Recompute every trial by hand from the same seed/stream layout and
        // compare the aggregate; any drift in data or estimator wiring shows.
        let mut cfg = gaussian_cfg();
        cfg.trials = 200;
        cfg.methods = vec![SimMethod::Classical, SimMethod::SplitSample];
        cfg.n_values = vec![8];
        let summary = run_mse_experiment_with_threads(&cfg, 2).unwrap();
        let spec = cfg.spec.as_ref().unwrap();
        let pop = spec.population_f().unwrap();
        let mut sum_classical = 0.0;
        let mut sum_split = 0.0;
        for t in 0..cfg.trials {
            let data = sample_pairs(spec, 8, &cfg.seed, streams::trial(t)).unwrap();
            let ys: Vec<f64> = data.iter().map(|p| p.0).collect();
            let c = estimators::classical(&ys).unwrap().theta_hat;
            sum_classical += c * c;
            let s = estimators::split_sample_ppi_pp(&data[..4], &data[4..], &pop)
                .unwrap()
                .theta_hat;
            sum_split += s * s;
        }
        let row_c = summary.row("classical", 8).unwrap();
        let row_s = summary.row("split-sample", 8).unwrap();
        assert!((row_c.empirical_mse - sum_classical / 200.0).abs() < 1e-13);
        assert!((row_s.empirical_mse - sum_split / 200.0).abs() < 1e-13);
    }

    #[test]
    fn per_fold_convention_doubles_draws() {
        let mut cfg = gaussian_cfg();
        cfg.n_convention = NConvention::PerFold;
        cfg.n_values = vec![5];
        cfg.methods = vec![SimMethod::SplitSample];
        let summary = run_mse_experiment_with_threads(&cfg, 1).unwrap();
        // Theory column must use the per-fold size directly.
        let m = cfg.spec.as_ref().unwrap().moments().unwrap();
        let expect = theory::mse_split_sample(&m, 5).unwrap().mse_total;
        let row = summary.row("split-sample", 5).unwrap();
        assert_eq!(row.theory_mse, Some(expect));
    }

    #[test]
    fn coverage_rows_have_intervals() {
        let mut cfg = gaussian_cfg();
        cfg.experiment = ExperimentKind::Coverage;
        cfg.methods = vec![
            SimMethod::Classical,
            SimMethod::SingleSample {
                variance: SingleSampleVariance::Optimistic,
            },
        ];
        cfg.trials = 500;
        let summary = run_coverage_experiment_with_threads(&cfg, 2).unwrap();
        for row in &summary.rows {
            let cov = row.coverage.unwrap();
            assert!((0.0..=1.0).contains(&cov));
            assert!(row.mean_ci_width.unwrap() >= 0.0);
        }
    }

    #[test]
    fn csv_has_fixed_header_and_row_count() {
        let cfg = gaussian_cfg();
        let summary = run_mse_experiment_with_threads(&cfg, 1).unwrap();
        let csv = summary.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "method,n,empirical_mse,mse_stderr,theory_mse,coverage,mean_ci_width"
        );
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn bootstrap_rejects_theta_override() {
        let mut cfg = gaussian_cfg();
        cfg.spec = None;
        cfg.dataset = Some(DatasetConfig {
            path: "unused.csv".into(),
            labels: None,
            noise: None,
        });
        cfg.true_theta = TrueTheta::Value(0.5);
        assert!(matches!(
            cfg.validate().unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }
}
