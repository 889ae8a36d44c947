//! Generative specifications and seeded samplers for every data-generating
//! process used in the analysis and experiments.
//!
//! Reproducibility contract: all randomness flows through a [`SeedSpec`] and a
//! stream index. A generator is derived as `ChaCha8` keyed by the base seed
//! with the stream index selecting one of 2^64 independent ChaCha streams, so
//! draws are bit-identical for equal `(seed, stream)` and independent across
//! streams regardless of the order in which streams are consumed. Parallel
//! trials assign one stream per trial index.

use crate::error::{Error, Result};
use crate::estimators::InfinitePopulationF;
use crate::moments::{
    discrete_moments, empirical_moments, gaussian_moments, signed_binary_moments,
    EmpiricalMomentOptions, JointMoments, SignedBinaryPmf,
};
use crate::oracle::DiscreteJointSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Base seed plus the stream-derivation rule (see module docs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedSpec {
    pub base_seed: u64,
}

impl SeedSpec {
    pub fn new(base_seed: u64) -> Self {
        Self { base_seed }
    }

    /// Generator for one stream. Streams with distinct indices are
    /// independent; the same `(base_seed, stream)` always yields the same
    /// draws.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(stream);
        rng
    }
}

/// Stream-index layout. Trials own the low stream indices; auxiliary draws
/// (pseudo-label generation) live in a disjoint high range.
pub mod streams {
    /// Stream for trial `i` of an experiment.
    pub const fn trial(i: u64) -> u64 {
        i
    }

    /// Stream used to generate a dataset's pseudo-label column once per
    /// experiment.
    pub const NOISE: u64 = 1 << 48;
}

/// Binary label encoding of a dataset column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelEncoding {
    /// Labels in `{-1, +1}`.
    Pm1,
    /// Labels in `{0, 1}`.
    ZeroOne,
}

impl LabelEncoding {
    fn negative_value(&self) -> f64 {
        match self {
            Self::Pm1 => -1.0,
            Self::ZeroOne => 0.0,
        }
    }

    /// Detect the encoding of a binary label slice. All-positive slices
    /// default to `Pm1`.
    pub fn detect(labels: &[f64]) -> Result<Self> {
        let mut saw_zero = false;
        let mut saw_neg = false;
        for &v in labels {
            if v == 0.0 {
                saw_zero = true;
            } else if v == -1.0 {
                saw_neg = true;
            } else if v != 1.0 {
                return Err(Error::InvalidDistribution(format!(
                    "label {v} is not in {{0,1}} or {{-1,+1}}"
                )));
            }
        }
        match (saw_zero, saw_neg) {
            (true, true) => Err(Error::InvalidDistribution(
                "labels mix {0,1} and {-1,+1} encodings".into(),
            )),
            (true, false) => Ok(Self::ZeroOne),
            _ => Ok(Self::Pm1),
        }
    }
}

/// Affinely map `{0,1}`-encoded values onto `{-1,+1}` (`v ↦ 2v - 1`).
pub fn zero_one_to_pm1(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| 2.0 * v - 1.0).collect()
}

/// Confusion-matrix pseudo-label generator: `tpr = P(F=pos | Y=pos)`,
/// `fpr = P(F=pos | Y=neg)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub tpr: f64,
    pub fpr: f64,
}

impl NoiseModel {
    pub fn new(tpr: f64, fpr: f64) -> Result<Self> {
        let model = Self { tpr, fpr };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tpr", self.tpr), ("fpr", self.fpr)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDistribution(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// The exact joint pmf of `(Y, F)` induced by this noise model on labels
    /// with `P(Y=pos) = p_pos`, in the given encoding.
    pub fn induced_spec(&self, p_pos: f64, encoding: LabelEncoding) -> Result<DiscreteJointSpec> {
        self.validate()?;
        if !(0.0..=1.0).contains(&p_pos) {
            return Err(Error::InvalidDistribution(format!(
                "p_pos must lie in [0, 1], got {p_pos}"
            )));
        }
        let neg = encoding.negative_value();
        DiscreteJointSpec::new(
            vec![(neg, neg), (neg, 1.0), (1.0, neg), (1.0, 1.0)],
            vec![
                (1.0 - p_pos) * (1.0 - self.fpr),
                (1.0 - p_pos) * self.fpr,
                p_pos * (1.0 - self.tpr),
                p_pos * self.tpr,
            ],
        )
    }
}

/// Draw one pseudo-label per input label, preserving the input encoding.
pub fn apply_noise_model(
    labels: &[f64],
    model: &NoiseModel,
    seed: &SeedSpec,
    stream: u64,
) -> Result<Vec<f64>> {
    model.validate()?;
    let encoding = LabelEncoding::detect(labels)?;
    let neg = encoding.negative_value();
    let mut rng = seed.rng(stream);
    Ok(labels
        .iter()
        .map(|&y| {
            let p_pos = if y == 1.0 { model.tpr } else { model.fpr };
            if rng.random::<f64>() < p_pos {
                1.0
            } else {
                neg
            }
        })
        .collect())
}

/// A loaded dataset of `(y, f)` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dataset {
    pub pairs: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InsufficientData("empty dataset".into()));
        }
        Ok(Self { pairs })
    }

    /// Load from CSV with a header row naming `y` and `f` columns
    /// (additional columns ignored).
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let (ys, fs) = read_csv_columns(path)?;
        let fs = fs.ok_or_else(|| {
            Error::InvalidConfig(format!("{}: missing required column 'f'", path.display()))
        })?;
        Self::new(ys.into_iter().zip(fs).collect())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn mean_y(&self) -> f64 {
        self.pairs.iter().map(|p| p.0).sum::<f64>() / self.len() as f64
    }

    /// Pseudo-label population of the full dataset (unbiased variance).
    pub fn population_f(&self) -> Result<InfinitePopulationF> {
        let n = self.len();
        if n < 2 {
            return Err(Error::InsufficientData(
                "need at least 2 rows for a pseudo-label population".into(),
            ));
        }
        let fs: Vec<f64> = self.pairs.iter().map(|p| p.1).collect();
        let mu = crate::moments::mean(&fs);
        InfinitePopulationF::new(mu, crate::moments::sample_variance(&fs))
    }

    /// Replace the pseudo-label column with noise-model draws from the label
    /// column.
    pub fn with_noise_pseudo_labels(
        &self,
        model: &NoiseModel,
        seed: &SeedSpec,
        stream: u64,
    ) -> Result<Self> {
        let ys: Vec<f64> = self.pairs.iter().map(|p| p.0).collect();
        let fs = apply_noise_model(&ys, model, seed, stream)?;
        Self::new(ys.into_iter().zip(fs).collect())
    }

    /// Affinely remap a `{0,1}`-encoded dataset onto `{-1,+1}`.
    pub fn to_pm1(&self) -> Result<Self> {
        let ys: Vec<f64> = self.pairs.iter().map(|p| p.0).collect();
        let fs: Vec<f64> = self.pairs.iter().map(|p| p.1).collect();
        for col in [&ys, &fs] {
            if LabelEncoding::detect(col)? != LabelEncoding::ZeroOne {
                // Already signed (or all ones); mapping would corrupt it.
                if col.iter().any(|&v| v == -1.0) {
                    return Err(Error::InvalidDistribution(
                        "dataset already uses {-1,+1}".into(),
                    ));
                }
            }
        }
        Self::new(
            zero_one_to_pm1(&ys)
                .into_iter()
                .zip(zero_one_to_pm1(&fs))
                .collect(),
        )
    }
}

/// Read `y` (required) and `f` (optional) columns from a headered CSV.
pub fn read_csv_columns(path: &Path) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let y_idx = headers
        .iter()
        .position(|h| h.trim() == "y")
        .ok_or_else(|| {
            Error::InvalidConfig(format!("{}: missing required column 'y'", path.display()))
        })?;
    let f_idx = headers.iter().position(|h| h.trim() == "f");
    let mut ys = Vec::new();
    let mut fs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::InvalidConfig(format!("{}: short row", path.display())))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
        };
        ys.push(parse(y_idx)?);
        if let Some(idx) = f_idx {
            fs.push(parse(idx)?);
        }
    }
    if ys.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok((ys, if f_idx.is_some() { Some(fs) } else { None }))
}

/// Read the `f` column of a headered CSV (for unlabeled pseudo-label pools).
pub fn read_csv_f_column(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let f_idx = headers
        .iter()
        .position(|h| h.trim() == "f")
        .ok_or_else(|| {
            Error::InvalidConfig(format!("{}: missing required column 'f'", path.display()))
        })?;
    let mut fs = Vec::new();
    for record in reader.records() {
        let record = record?;
        let v = record
            .get(f_idx)
            .ok_or_else(|| Error::InvalidConfig(format!("{}: short row", path.display())))?
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        fs.push(v);
    }
    if fs.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(fs)
}

/// A generative description of the joint law of `(Y, F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// Jointly Gaussian pair.
    #[serde(rename = "gaussian")]
    GaussianJoint {
        mu_y: f64,
        mu_f: f64,
        var_y: f64,
        var_f: f64,
        cov_fy: f64,
    },
    /// Signed-binary pmf over `{-1,+1}²`.
    SignedBinary {
        #[serde(flatten)]
        pmf: SignedBinaryPmf,
    },
    /// Arbitrary finite pmf over real pairs.
    FiniteDiscrete {
        #[serde(flatten)]
        spec: DiscreteJointSpec,
    },
    /// The empirical law of a loaded dataset (draws resample rows).
    EmpiricalBootstrap { pairs: Vec<(f64, f64)> },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::GaussianJoint {
                mu_y,
                mu_f,
                var_y,
                var_f,
                cov_fy,
            } => gaussian_moments(*mu_y, *mu_f, *var_y, *var_f, *cov_fy).map(|_| ()),
            Self::SignedBinary { pmf } => pmf.validate(),
            Self::FiniteDiscrete { spec } => spec.validate(),
            Self::EmpiricalBootstrap { pairs } => {
                if pairs.is_empty() {
                    Err(Error::InvalidDistribution("empty bootstrap dataset".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Population moments of the spec (empirical `ddof = 1` moments for a
    /// bootstrap dataset).
    pub fn moments(&self) -> Result<JointMoments> {
        match self {
            Self::GaussianJoint {
                mu_y,
                mu_f,
                var_y,
                var_f,
                cov_fy,
            } => gaussian_moments(*mu_y, *mu_f, *var_y, *var_f, *cov_fy),
            Self::SignedBinary { pmf } => signed_binary_moments(pmf),
            Self::FiniteDiscrete { spec } => discrete_moments(spec),
            Self::EmpiricalBootstrap { pairs } => {
                empirical_moments(pairs, EmpiricalMomentOptions::default())
            }
        }
    }

    /// The infinite-pool pseudo-label population implied by the spec.
    pub fn population_f(&self) -> Result<InfinitePopulationF> {
        let m = self.moments()?;
        InfinitePopulationF::new(m.mu_f, m.var_f)
    }

    /// The estimand `θ = E[Y]`.
    pub fn true_theta(&self) -> Result<f64> {
        Ok(self.moments()?.mu_y)
    }
}

fn sample_discrete_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// `n` independent draws from the joint law, deterministic given
/// `(seed, stream)`.
pub fn sample_pairs(
    spec: &DistributionSpec,
    n: usize,
    seed: &SeedSpec,
    stream: u64,
) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidSampleSize("cannot draw 0 pairs".into()));
    }
    let mut rng = seed.rng(stream);
    let mut out = Vec::with_capacity(n);
    match spec {
        DistributionSpec::GaussianJoint {
            mu_y,
            mu_f,
            var_y,
            var_f,
            cov_fy,
        } => {
            // Conditional decomposition: F first, then Y | F.
            let sd_f = var_f.sqrt();
            let slope = cov_fy / var_f;
            let cond_sd = (var_y - cov_fy * cov_fy / var_f).max(0.0).sqrt();
            for _ in 0..n {
                let zf: f64 = rng.sample(StandardNormal);
                let zy: f64 = rng.sample(StandardNormal);
                let f = mu_f + sd_f * zf;
                let y = mu_y + slope * (f - mu_f) + cond_sd * zy;
                out.push((y, f));
            }
        }
        DistributionSpec::SignedBinary { pmf } => {
            let support = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)];
            let probs = [pmf.p_nn, pmf.p_np, pmf.p_pn, pmf.p_pp];
            for _ in 0..n {
                out.push(support[sample_discrete_index(&probs, &mut rng)]);
            }
        }
        DistributionSpec::FiniteDiscrete { spec } => {
            for _ in 0..n {
                out.push(spec.support[sample_discrete_index(&spec.probs, &mut rng)]);
            }
        }
        DistributionSpec::EmpiricalBootstrap { pairs } => {
            for _ in 0..n {
                out.push(pairs[rng.random_range(0..pairs.len())]);
            }
        }
    }
    Ok(out)
}

/// Split a dataset into `n_labeled` rows sampled without replacement and the
/// remaining rows' pseudo-labels.
///
/// The labeled rows come back in draw order, so a prefix of the labeled set
/// is itself a valid smaller without-replacement sample.
pub fn bootstrap_split(
    dataset: &Dataset,
    n_labeled: usize,
    seed: &SeedSpec,
    stream: u64,
) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
    if n_labeled >= dataset.len() {
        return Err(Error::InsufficientData(format!(
            "n_labeled = {n_labeled} must be smaller than the dataset ({} rows)",
            dataset.len()
        )));
    }
    if n_labeled == 0 {
        return Err(Error::InsufficientData("n_labeled must be positive".into()));
    }
    let mut rng = seed.rng(stream);
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    // Partial Fisher-Yates: after i steps the prefix holds a uniform
    // without-replacement sample of size i.
    for i in 0..n_labeled {
        let j = rng.random_range(i..indices.len());
        indices.swap(i, j);
    }
    let labeled: Vec<(f64, f64)> = indices[..n_labeled]
        .iter()
        .map(|&i| dataset.pairs[i])
        .collect();
    let unlabeled: Vec<f64> = indices[n_labeled..]
        .iter()
        .map(|&i| dataset.pairs[i].1)
        .collect();
    Ok((labeled, unlabeled))
}
