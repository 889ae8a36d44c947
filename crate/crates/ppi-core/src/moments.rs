//! Moment bookkeeping for the joint law of a label `Y` and a pseudo-label `F`.
//!
//! Every closed-form result in [`crate::theory`] is a function of the moments
//! collected in [`JointMoments`]: means, variances, the covariance
//! `σ_fy = Cov(F, Y)`, and the fourth-order cross terms `Cov(Y², F)`,
//! `Cov(Y, F²)`, and `Cov(Y², F²)`. This module provides four ways to obtain
//! them: empirically from paired data, in closed form for jointly Gaussian
//! variables, exactly for signed-binary pmfs, and exactly for arbitrary finite
//! discrete joint pmfs.
//!
//! Moments are population-level quantities; no sample size is stored, so the
//! same `JointMoments` can feed formulas evaluated at many `n`.

use crate::error::{Error, Result};
use crate::oracle::DiscreteJointSpec;
use serde::{Deserialize, Serialize};

/// Tolerance for pmf normalization checks.
pub(crate) const PMF_SUM_TOL: f64 = 1e-12;

/// Tolerance below which a moment set counts as Gaussian-consistent.
///
/// Loose enough to absorb floating-point noise in moment construction, tight
/// enough to reject moments that were never Gaussian to begin with.
pub const GAUSSIAN_CONSISTENCY_TOL: f64 = 1e-9;

/// Population (or estimated) moments of the pair `(Y, F)` up to the
/// fourth-order cross terms the finite-sample theory needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointMoments {
    /// Mean of the label, `μ_y` (this is the estimand `θ`).
    pub mu_y: f64,
    /// Mean of the pseudo-label, `μ_f`.
    pub mu_f: f64,
    /// `σ_y² = Var(Y)`.
    pub var_y: f64,
    /// `σ_f² = Var(F)`.
    pub var_f: f64,
    /// `σ_fy = Cov(F, Y)`.
    pub cov_fy: f64,
    /// `σ_{y²f} = Cov(Y², F)`.
    pub cov_y2f: f64,
    /// `σ_{yf²} = Cov(Y, F²)`.
    pub cov_yf2: f64,
    /// `σ_{y²f²} = Cov(Y², F²)`.
    pub cov_y2f2: f64,
}

impl JointMoments {
    /// Correlation `ρ = σ_fy / (σ_y σ_f)`.
    ///
    /// Returns `None` when either variance is not strictly positive.
    pub fn rho(&self) -> Option<f64> {
        if self.var_y > 0.0 && self.var_f > 0.0 {
            Some(self.cov_fy / (self.var_y * self.var_f).sqrt())
        } else {
            None
        }
    }

    /// Whether the higher cross moments satisfy the jointly-Gaussian
    /// identities `σ_{y²f²} = 2σ_fy² + 4σ_fy μ_f μ_y`, `σ_{yf²} = 2σ_fy μ_f`,
    /// and `σ_{y²f} = 2σ_fy μ_y` within `tol`.
    pub fn is_gaussian_consistent(&self, tol: f64) -> bool {
        let c22 = 2.0 * self.cov_fy * self.cov_fy + 4.0 * self.cov_fy * self.mu_f * self.mu_y;
        let c12 = 2.0 * self.cov_fy * self.mu_f;
        let c21 = 2.0 * self.cov_fy * self.mu_y;
        (self.cov_y2f2 - c22).abs() <= tol
            && (self.cov_yf2 - c12).abs() <= tol
            && (self.cov_y2f - c21).abs() <= tol
    }
}

/// Divisor convention for empirical variances and covariances.
///
/// `ddof = 1` (the default) divides by `n - 1` and is unbiased; `ddof = 0`
/// divides by `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalMomentOptions {
    pub ddof: u8,
}

impl Default for EmpiricalMomentOptions {
    fn default() -> Self {
        Self { ddof: 1 }
    }
}

/// Arithmetic mean. Callers guarantee `xs` is nonempty.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Empirical covariance `Ĉov(X, Z) = (1/(n-ddof)) Σ (x_i - x̄)(z_i - z̄)`
/// over parallel slices.
fn cov_with_ddof(xs: &[f64], zs: &[f64], ddof: u8) -> f64 {
    let n = xs.len();
    let xbar = mean(xs);
    let zbar = mean(zs);
    let sum: f64 = xs
        .iter()
        .zip(zs)
        .map(|(&x, &z)| (x - xbar) * (z - zbar))
        .sum();
    sum / (n - ddof as usize) as f64
}

/// Unbiased (`ddof = 1`) sample covariance of `(y, f)` pairs.
///
/// Callers guarantee at least two pairs.
pub fn sample_cov(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let ybar = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let fbar = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    pairs
        .iter()
        .map(|&(y, f)| (y - ybar) * (f - fbar))
        .sum::<f64>()
        / (n - 1.0)
}

/// Unbiased (`ddof = 1`) sample variance. Callers guarantee `xs.len() >= 2`.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xbar = mean(xs);
    xs.iter().map(|&x| (x - xbar) * (x - xbar)).sum::<f64>() / (n - 1.0)
}

/// Empirical `JointMoments` from observed `(y, f)` pairs.
///
/// Means are arithmetic means; all variance/covariance terms use the
/// `n - ddof` divisor. The higher cross terms apply the same covariance
/// estimator to the transformed pairs `(y², f)`, `(y, f²)`, and `(y², f²)`.
pub fn empirical_moments(
    pairs: &[(f64, f64)],
    opts: EmpiricalMomentOptions,
) -> Result<JointMoments> {
    if opts.ddof > 1 {
        return Err(Error::InvalidMoments(format!(
            "ddof must be 0 or 1, got {}",
            opts.ddof
        )));
    }
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 pairs for covariance terms, got {}",
            pairs.len()
        )));
    }
    let ys: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let fs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let y2: Vec<f64> = ys.iter().map(|&y| y * y).collect();
    let f2: Vec<f64> = fs.iter().map(|&f| f * f).collect();
    let d = opts.ddof;
    Ok(JointMoments {
        mu_y: mean(&ys),
        mu_f: mean(&fs),
        var_y: cov_with_ddof(&ys, &ys, d),
        var_f: cov_with_ddof(&fs, &fs, d),
        cov_fy: cov_with_ddof(&fs, &ys, d),
        cov_y2f: cov_with_ddof(&y2, &fs, d),
        cov_yf2: cov_with_ddof(&ys, &f2, d),
        cov_y2f2: cov_with_ddof(&y2, &f2, d),
    })
}

/// `JointMoments` of a jointly Gaussian pair.
///
/// The first and second moments are taken as given; the higher cross terms
/// follow from the Gaussian product-moment identities:
///
/// ```text
/// σ_{y²f²} = 2σ_fy² + 4σ_fy μ_f μ_y
/// σ_{yf²}  = 2σ_fy μ_f
/// σ_{y²f}  = 2σ_fy μ_y
/// ```
pub fn gaussian_moments(
    mu_y: f64,
    mu_f: f64,
    var_y: f64,
    var_f: f64,
    cov_fy: f64,
) -> Result<JointMoments> {
    if !(var_y > 0.0) || !(var_f > 0.0) {
        return Err(Error::InvalidMoments(format!(
            "Gaussian variances must be positive, got var_y={var_y}, var_f={var_f}"
        )));
    }
    let bound = (var_y * var_f).sqrt();
    if cov_fy.abs() > bound {
        return Err(Error::InvalidMoments(format!(
            "Cauchy-Schwarz violated: |cov_fy|={} > sqrt(var_y*var_f)={bound}",
            cov_fy.abs()
        )));
    }
    Ok(JointMoments {
        mu_y,
        mu_f,
        var_y,
        var_f,
        cov_fy,
        cov_y2f: 2.0 * cov_fy * mu_y,
        cov_yf2: 2.0 * cov_fy * mu_f,
        cov_y2f2: 2.0 * cov_fy * cov_fy + 4.0 * cov_fy * mu_f * mu_y,
    })
}

/// A pmf over `{-1, +1}²` for the pair `(Y, F)`.
///
/// Field names read `p_<y sign><f sign>`, e.g. `p_pn = P(Y=+1, F=-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedBinaryPmf {
    /// `P(Y=-1, F=-1)`
    pub p_nn: f64,
    /// `P(Y=-1, F=+1)`
    pub p_np: f64,
    /// `P(Y=+1, F=-1)`
    pub p_pn: f64,
    /// `P(Y=+1, F=+1)`
    pub p_pp: f64,
}

impl SignedBinaryPmf {
    pub fn new(p_nn: f64, p_np: f64, p_pn: f64, p_pp: f64) -> Result<Self> {
        let pmf = Self {
            p_nn,
            p_np,
            p_pn,
            p_pp,
        };
        pmf.validate()?;
        Ok(pmf)
    }

    /// The pmf induced by drawing `Y = +1` with probability `p_pos` and then
    /// a pseudo-label with `P(F=+1 | Y=+1) = tpr`, `P(F=+1 | Y=-1) = fpr`.
    pub fn from_noise_rates(p_pos: f64, tpr: f64, fpr: f64) -> Result<Self> {
        for (name, v) in [("p_pos", p_pos), ("tpr", tpr), ("fpr", fpr)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidDistribution(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Self::new(
            (1.0 - p_pos) * (1.0 - fpr),
            (1.0 - p_pos) * fpr,
            p_pos * (1.0 - tpr),
            p_pos * tpr,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let cells = [self.p_nn, self.p_np, self.p_pn, self.p_pp];
        if cells.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution(
                "signed-binary pmf has a negative or non-finite cell".into(),
            ));
        }
        let sum: f64 = cells.iter().sum();
        if (sum - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "signed-binary pmf sums to {sum}, expected 1 within {PMF_SUM_TOL:e}"
            )));
        }
        Ok(())
    }

    /// The same pmf as a general discrete joint spec over the four corners.
    pub fn to_discrete_spec(&self) -> DiscreteJointSpec {
        DiscreteJointSpec::new(
            vec![(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)],
            vec![self.p_nn, self.p_np, self.p_pn, self.p_pp],
        )
        .expect("a valid SignedBinaryPmf is a valid DiscreteJointSpec")
    }
}

/// Exact `JointMoments` of a signed-binary pmf.
///
/// Because `Y² = F² = 1`, all higher cross covariances vanish identically and
/// `σ_y² = 1 - μ_y²`, `σ_f² = 1 - μ_f²`.
pub fn signed_binary_moments(pmf: &SignedBinaryPmf) -> Result<JointMoments> {
    pmf.validate()?;
    let mu_y = (pmf.p_pn + pmf.p_pp) - (pmf.p_nn + pmf.p_np);
    let mu_f = (pmf.p_np + pmf.p_pp) - (pmf.p_nn + pmf.p_pn);
    let e_fy = (pmf.p_pp + pmf.p_nn) - (pmf.p_np + pmf.p_pn);
    Ok(JointMoments {
        mu_y,
        mu_f,
        var_y: 1.0 - mu_y * mu_y,
        var_f: 1.0 - mu_f * mu_f,
        cov_fy: e_fy - mu_f * mu_y,
        cov_y2f: 0.0,
        cov_yf2: 0.0,
        cov_y2f2: 0.0,
    })
}

/// Exact `JointMoments` of a finite discrete joint pmf: every field is the
/// pmf-weighted expectation.
pub fn discrete_moments(spec: &DiscreteJointSpec) -> Result<JointMoments> {
    spec.validate()?;
    let e = |g: &dyn Fn(f64, f64) -> f64| -> f64 {
        spec.support
            .iter()
            .zip(&spec.probs)
            .map(|(&(y, f), &p)| p * g(y, f))
            .sum()
    };
    let mu_y = e(&|y, _| y);
    let mu_f = e(&|_, f| f);
    let e_y2 = e(&|y, _| y * y);
    let e_f2 = e(&|_, f| f * f);
    Ok(JointMoments {
        mu_y,
        mu_f,
        var_y: e_y2 - mu_y * mu_y,
        var_f: e_f2 - mu_f * mu_f,
        cov_fy: e(&|y, f| y * f) - mu_y * mu_f,
        cov_y2f: e(&|y, f| y * y * f) - e_y2 * mu_f,
        cov_yf2: e(&|y, f| y * f * f) - mu_y * e_f2,
        cov_y2f2: e(&|y, f| y * y * f * f) - e_y2 * e_f2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empirical_identical_coordinates() {
        let m = empirical_moments(
            &[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)],
            EmpiricalMomentOptions::default(),
        )
        .unwrap();
        assert_eq!(m.mu_y, 2.0);
        assert_eq!(m.mu_f, 2.0);
        assert_eq!(m.var_y, 1.0);
        assert_eq!(m.var_f, 1.0);
        assert_eq!(m.cov_fy, 1.0);
    }

    #[test]
    fn empirical_constant_data_is_fine() {
        let m = empirical_moments(
            &[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)],
            EmpiricalMomentOptions::default(),
        )
        .unwrap();
        assert_eq!(m.var_y, 0.0);
        assert_eq!(m.var_f, 0.0);
        assert_eq!(m.cov_fy, 0.0);
    }

    #[test]
    fn empirical_anticorrelated_pair() {
        let m = empirical_moments(&[(0.0, 1.0), (1.0, 0.0)], EmpiricalMomentOptions::default())
            .unwrap();
        assert_relative_eq!(m.cov_fy, -0.5, max_relative = 1e-15);
    }

    #[test]
    fn empirical_rejects_single_pair() {
        let err = empirical_moments(&[(1.0, 2.0)], EmpiricalMomentOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn empirical_ddof_zero() {
        // Two points, ddof=0: covariance halves relative to ddof=1.
        let m = empirical_moments(
            &[(0.0, 1.0), (1.0, 0.0)],
            EmpiricalMomentOptions { ddof: 0 },
        )
        .unwrap();
        assert_relative_eq!(m.cov_fy, -0.25, max_relative = 1e-15);
    }

    #[test]
    fn gaussian_zero_mean_isserlis() {
        let m = gaussian_moments(0.0, 0.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(m.cov_y2f2, 0.5);
        assert_eq!(m.cov_yf2, 0.0);
        assert_eq!(m.cov_y2f, 0.0);
    }

    #[test]
    fn gaussian_independent_has_zero_higher_terms() {
        let m = gaussian_moments(3.0, -2.0, 2.0, 5.0, 0.0).unwrap();
        assert_eq!(m.cov_y2f2, 0.0);
        assert_eq!(m.cov_yf2, 0.0);
        assert_eq!(m.cov_y2f, 0.0);
    }

    #[test]
    fn gaussian_nonzero_means() {
        let m = gaussian_moments(1.0, 2.0, 1.0, 1.0, 0.3).unwrap();
        assert_relative_eq!(m.cov_y2f2, 2.58, max_relative = 1e-14);
        assert_relative_eq!(m.cov_yf2, 1.2, max_relative = 1e-14);
        assert_relative_eq!(m.cov_y2f, 0.6, max_relative = 1e-14);
        assert!(m.is_gaussian_consistent(1e-12));
    }

    #[test]
    fn gaussian_rejects_cauchy_schwarz_violation() {
        let err = gaussian_moments(0.0, 0.0, 1.0, 1.0, 1.1).unwrap_err();
        assert!(matches!(err, Error::InvalidMoments(_)));
    }

    #[test]
    fn signed_binary_balanced_agreement() {
        // P(F=Y)=0.9 split evenly, balanced marginals.
        let pmf = SignedBinaryPmf::new(0.45, 0.05, 0.05, 0.45).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        assert_eq!(m.mu_y, 0.0);
        assert_eq!(m.mu_f, 0.0);
        assert_eq!(m.var_y, 1.0);
        assert_eq!(m.var_f, 1.0);
        assert_relative_eq!(m.cov_fy, 0.8, max_relative = 1e-15);
        assert_eq!(m.cov_y2f2, 0.0);
    }

    #[test]
    fn signed_binary_uniform_is_independent() {
        let pmf = SignedBinaryPmf::new(0.25, 0.25, 0.25, 0.25).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        assert_eq!(m.cov_fy, 0.0);
    }

    #[test]
    fn signed_binary_point_mass_degenerates() {
        let pmf = SignedBinaryPmf::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        assert_eq!(m.var_y, 0.0);
        assert_eq!(m.var_f, 0.0);
    }

    #[test]
    fn signed_binary_rejects_bad_pmf() {
        assert!(SignedBinaryPmf::new(0.5, 0.5, 0.5, -0.5).is_err());
        assert!(SignedBinaryPmf::new(0.3, 0.3, 0.3, 0.3).is_err());
    }

    #[test]
    fn noise_rates_reproduce_balanced_agreement_pmf() {
        let pmf = SignedBinaryPmf::from_noise_rates(0.5, 0.9, 0.1).unwrap();
        let m = signed_binary_moments(&pmf).unwrap();
        assert_relative_eq!(m.cov_fy, 0.8, max_relative = 1e-15);
        assert_eq!(m.mu_f, 0.0);
    }

    #[test]
    fn discrete_point_mass() {
        let spec = DiscreteJointSpec::new(vec![(2.0, 3.0)], vec![1.0]).unwrap();
        let m = discrete_moments(&spec).unwrap();
        assert_eq!(m.mu_y, 2.0);
        assert_eq!(m.mu_f, 3.0);
        assert_eq!(m.var_y, 0.0);
        assert_eq!(m.var_f, 0.0);
        assert_eq!(m.cov_fy, 0.0);
        assert_eq!(m.cov_y2f2, 0.0);
    }

    #[test]
    fn discrete_agrees_with_signed_binary() {
        let pmf = SignedBinaryPmf::new(0.45, 0.05, 0.05, 0.45).unwrap();
        let a = signed_binary_moments(&pmf).unwrap();
        let b = discrete_moments(&pmf.to_discrete_spec()).unwrap();
        for (x, y) in [
            (a.mu_y, b.mu_y),
            (a.mu_f, b.mu_f),
            (a.var_y, b.var_y),
            (a.var_f, b.var_f),
            (a.cov_fy, b.cov_fy),
            (a.cov_y2f, b.cov_y2f),
            (a.cov_yf2, b.cov_yf2),
            (a.cov_y2f2, b.cov_y2f2),
        ] {
            assert!((x - y).abs() < 1e-14, "field mismatch: {x} vs {y}");
        }
    }

    #[test]
    fn discrete_two_point_diagonal() {
        let spec =
            DiscreteJointSpec::new(vec![(0.0, 0.0), (1.0, 1.0)], vec![0.5, 0.5]).unwrap();
        let m = discrete_moments(&spec).unwrap();
        assert_relative_eq!(m.cov_fy, 0.25, max_relative = 1e-15);
        assert_relative_eq!(m.var_y, 0.25, max_relative = 1e-15);
        assert_relative_eq!(m.var_f, 0.25, max_relative = 1e-15);
    }
}
