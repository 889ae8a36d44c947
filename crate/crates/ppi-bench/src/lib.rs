//! Benchmark-only crate: shared fixtures for the criterion benches.

use ppi_core::distributions::{sample_pairs, DistributionSpec, SeedSpec};
use ppi_core::DiscreteJointSpec;
use ppi_core::SignedBinaryPmf;

/// Balanced signed-binary law with strong pseudo-labels.
pub fn binary_spec() -> DiscreteJointSpec {
    SignedBinaryPmf::new(0.45, 0.05, 0.05, 0.45)
        .unwrap()
        .to_discrete_spec()
}

/// A fixed Gaussian sample of `n` pairs for estimator micro-benches.
pub fn gaussian_pairs(n: usize) -> Vec<(f64, f64)> {
    let spec = DistributionSpec::GaussianJoint {
        mu_y: 0.0,
        mu_f: 0.0,
        var_y: 1.0,
        var_f: 1.0,
        cov_fy: 0.6,
    };
    sample_pairs(&spec, n, &SeedSpec::new(17), 0).unwrap()
}
