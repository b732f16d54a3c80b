//! Monte-Carlo calibration check of the Mahalanobis gate: samples drawn from
//! a random 4-dimensional Gaussian should fall inside the gate at the rate
//! the chi-square quantile promises.

use nalgebra::{Cholesky, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kalman::{MeasurementCovariance, MeasurementVector, ProjectedDistribution};

/// Probability mass inside the 4-dof chi-square gate.
pub const GATE_CONFIDENCE: f64 = 0.95;
/// Sample count at and above which the tolerance is the fixed `±0.01`.
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCheckReport {
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
    pub inside: usize,
    pub fraction: f64,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

/// Accepted deviation from 0.95: `±0.01`, widened to three binomial standard
/// errors for small sample counts.
pub fn tolerance(samples: usize) -> f64 {
    let p = GATE_CONFIDENCE;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    (3.0 * se).max(0.01)
}

/// Random mean and well-conditioned covariance.
pub fn random_distribution(rng: &mut impl Rng) -> ProjectedDistribution {
    let mean = MeasurementVector::from_fn(|_, _| rng.random_range(-200.0..200.0));
    let a = SMatrix::<f64, 4, 4>::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal) * 5.0);
    let innovation_cov = a * a.transpose() + MeasurementCovariance::identity() * 0.5;
    ProjectedDistribution { mean, innovation_cov }
}

pub fn run_gate_check(samples: usize, seed: u64, threshold: f64) -> Result<GateCheckReport> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = random_distribution(&mut rng);
    let l = Cholesky::new(dist.innovation_cov)
        .ok_or(Error::SingularInnovation)?
        .l();
    let draws: Vec<MeasurementVector> = (0..samples)
        .map(|_| {
            let z = MeasurementVector::from_fn(|_, _| rng.sample(StandardNormal));
            dist.mean + l * z
        })
        .collect();
    let inside = dist
        .squared_mahalanobis(&draws)?
        .into_iter()
        .filter(|&d| d <= threshold)
        .count();
    let fraction = inside as f64 / samples as f64;
    let tol = tolerance(samples);
    let (lower, upper) = (GATE_CONFIDENCE - tol, GATE_CONFIDENCE + tol);
    Ok(GateCheckReport {
        samples,
        seed,
        threshold,
        inside,
        fraction,
        lower,
        upper,
        passed: (lower..=upper).contains(&fraction),
    })
}
