//! Constant-velocity Kalman filter over the image-space state
//! `(u, v, aspect, h, du, dv, daspect, dh)` with `(u, v, aspect, h)` observed
//! directly.
//!
//! All noise standard deviations scale with the current box height, except
//! for the aspect-ratio components which are dimensionless.

use nalgebra::{Cholesky, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundingBox, MeasurementXyah};

pub type StateVector = SVector<f64, 8>;
pub type StateCovariance = SMatrix<f64, 8, 8>;
pub type MeasurementVector = SVector<f64, 4>;
pub type MeasurementCovariance = SMatrix<f64, 4, 4>;

/// Gaussian belief over the 8-dimensional track state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    pub mean: StateVector,
    pub covariance: StateCovariance,
}

impl StateDistribution {
    /// Box at the mean position.
    pub fn bbox(&self) -> BoundingBox {
        self.measurement().to_bbox()
    }

    pub fn measurement(&self) -> MeasurementXyah {
        MeasurementXyah {
            center_u: self.mean[0],
            center_v: self.mean[1],
            aspect: self.mean[2],
            height: self.mean[3],
        }
    }
}

/// A state distribution mapped into measurement space: mean `y` and
/// innovation covariance `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedDistribution {
    pub mean: MeasurementVector,
    pub innovation_cov: MeasurementCovariance,
}

impl ProjectedDistribution {
    /// Squared Mahalanobis distance of each measurement to `mean` under
    /// `innovation_cov`, via a Cholesky solve.
    pub fn squared_mahalanobis(&self, measurements: &[MeasurementVector]) -> Result<Vec<f64>> {
        let chol = Cholesky::new(self.innovation_cov).ok_or(Error::SingularInnovation)?;
        let l = chol.l();
        Ok(measurements
            .iter()
            .map(|m| {
                let d = m - self.mean;
                let z = l
                    .solve_lower_triangular(&d)
                    .expect("Cholesky factor has a positive diagonal");
                z.norm_squared()
            })
            .collect())
    }
}

/// Height-relative noise weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Position std (u, v, h) as a fraction of box height.
    pub position_weight: f64,
    /// Velocity std (du, dv, dh) as a fraction of box height.
    pub velocity_weight: f64,
    /// Measurement std of the aspect ratio.
    pub aspect_measurement_std: f64,
    /// Process std of the aspect ratio, and its initial std.
    pub aspect_process_std: f64,
    /// Process std of the aspect-ratio velocity, and its initial std.
    pub aspect_velocity_std: f64,
    /// Initial position std relative to measurement std.
    pub initial_position_scale: f64,
    /// Initial velocity std relative to per-frame process std.
    pub initial_velocity_scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            position_weight: 1.0 / 20.0,
            velocity_weight: 1.0 / 160.0,
            aspect_measurement_std: 1e-1,
            aspect_process_std: 1e-2,
            aspect_velocity_std: 1e-5,
            initial_position_scale: 2.0,
            initial_velocity_scale: 10.0,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct KalmanFilter {
    pub noise: NoiseModel,
}

fn transition() -> StateCovariance {
    let mut f = StateCovariance::identity();
    for i in 0..4 {
        f[(i, i + 4)] = 1.0;
    }
    f
}

fn observation() -> SMatrix<f64, 4, 8> {
    SMatrix::<f64, 4, 8>::identity()
}

fn diag_from_std(std: [f64; 8]) -> StateCovariance {
    StateCovariance::from_diagonal(&StateVector::from_iterator(std.iter().map(|s| s * s)))
}

fn symmetrize<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

impl KalmanFilter {
    pub fn new(noise: NoiseModel) -> Self {
        Self { noise }
    }

    /// Track belief for a fresh detection: zero velocity, diagonal covariance.
    pub fn initiate(&self, m: &MeasurementXyah) -> StateDistribution {
        let n = &self.noise;
        let h = m.height;
        let pos = n.initial_position_scale * n.position_weight * h;
        let vel = n.initial_velocity_scale * n.velocity_weight * h;
        let mean = StateVector::from_column_slice(&[
            m.center_u, m.center_v, m.aspect, m.height, 0.0, 0.0, 0.0, 0.0,
        ]);
        let covariance = diag_from_std([
            pos,
            pos,
            n.aspect_process_std,
            pos,
            vel,
            vel,
            n.aspect_velocity_std,
            vel,
        ]);
        StateDistribution { mean, covariance }
    }

    /// Process noise for one frame, scaled by the state's height.
    pub fn process_noise(&self, s: &StateDistribution) -> StateCovariance {
        let n = &self.noise;
        let h = s.mean[3];
        let pos = n.position_weight * h;
        let vel = n.velocity_weight * h;
        diag_from_std([
            pos,
            pos,
            n.aspect_process_std,
            pos,
            vel,
            vel,
            n.aspect_velocity_std,
            vel,
        ])
    }

    pub fn measurement_noise(&self, s: &StateDistribution) -> MeasurementCovariance {
        let n = &self.noise;
        let h = s.mean[3];
        let pos = n.position_weight * h;
        let std = [pos, pos, n.aspect_measurement_std, pos];
        MeasurementCovariance::from_diagonal(&MeasurementVector::from_iterator(std.iter().map(|s| s * s)))
    }

    /// One-frame constant-velocity prediction.
    pub fn predict(&self, s: &StateDistribution) -> StateDistribution {
        let q = self.process_noise(s);
        self.predict_with_noise(s, &q)
    }

    pub fn predict_with_noise(&self, s: &StateDistribution, q: &StateCovariance) -> StateDistribution {
        let f = transition();
        let mean = f * s.mean;
        let covariance = symmetrize(&(f * s.covariance * f.transpose() + q));
        StateDistribution { mean, covariance }
    }

    pub fn project(&self, s: &StateDistribution) -> ProjectedDistribution {
        let h = observation();
        let r = self.measurement_noise(s);
        ProjectedDistribution {
            mean: h * s.mean,
            innovation_cov: symmetrize(&(h * s.covariance * h.transpose() + r)),
        }
    }

    /// Standard Kalman correction with gain `P Hᵀ S⁻¹`.
    pub fn update(&self, s: &StateDistribution, m: &MeasurementXyah) -> Result<StateDistribution> {
        let h = observation();
        let projected = self.project(s);
        let chol = Cholesky::new(projected.innovation_cov).ok_or(Error::SingularInnovation)?;
        // K = P Hᵀ S⁻¹, solved as S Kᵀ = H P.
        let pht = s.covariance * h.transpose();
        let gain = chol.solve(&pht.transpose()).transpose();
        let innovation = MeasurementVector::from(m.as_array()) - projected.mean;
        let mean = s.mean + gain * innovation;
        let covariance = symmetrize(&((StateCovariance::identity() - gain * h) * s.covariance));
        Ok(StateDistribution { mean, covariance })
    }

    /// Squared Mahalanobis distance from the projected state to each measurement.
    pub fn gating_distance(&self, s: &StateDistribution, measurements: &[MeasurementXyah]) -> Result<Vec<f64>> {
        let ms: Vec<MeasurementVector> = measurements
            .iter()
            .map(|m| MeasurementVector::from(m.as_array()))
            .collect();
        self.project(s).squared_mahalanobis(&ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meas(u: f64, v: f64, a: f64, h: f64) -> MeasurementXyah {
        MeasurementXyah {
            center_u: u,
            center_v: v,
            aspect: a,
            height: h,
        }
    }

    #[test]
    fn initiate_sets_zero_velocity() {
        let kf = KalmanFilter::default();
        let s = kf.initiate(&meas(10.0, 20.0, 0.5, 40.0));
        assert_eq!(s.mean.as_slice(), &[10.0, 20.0, 0.5, 40.0, 0.0, 0.0, 0.0, 0.0]);
        for i in 0..8 {
            assert!(s.covariance[(i, i)] > 0.0);
            for j in 0..8 {
                if i != j {
                    assert_eq!(s.covariance[(i, j)], 0.0);
                }
            }
        }
        assert_eq!(s, kf.initiate(&meas(10.0, 20.0, 0.5, 40.0)));
    }

    #[test]
    fn predict_without_noise_is_constant_velocity() {
        let kf = KalmanFilter::default();
        let mut s = kf.initiate(&meas(10.0, 20.0, 0.5, 40.0));
        let zero = StateCovariance::zeros();
        assert_eq!(kf.predict_with_noise(&s, &zero).mean, s.mean);

        s.mean[4] = 1.0;
        let p = kf.predict_with_noise(&s, &zero);
        assert_eq!(p.mean[0], 11.0);
        assert_eq!(p.mean[1], 20.0);
    }

    #[test]
    fn predict_adds_noise() {
        let kf = KalmanFilter::default();
        let s = kf.initiate(&meas(10.0, 20.0, 0.5, 40.0));
        let bare = kf.predict_with_noise(&s, &StateCovariance::zeros());
        assert!(kf.predict(&s).covariance.trace() >= bare.covariance.trace());
    }

    #[test]
    fn project_selects_position() {
        let kf = KalmanFilter::default();
        let s = StateDistribution {
            mean: StateVector::from_column_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
            covariance: StateCovariance::zeros(),
        };
        let p = kf.project(&s);
        assert_eq!(p.mean.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.innovation_cov, kf.measurement_noise(&s));
    }

    #[test]
    fn zero_innovation_leaves_mean() {
        let kf = KalmanFilter::default();
        let s = kf.predict(&kf.initiate(&meas(10.0, 20.0, 0.5, 40.0)));
        let u = kf.update(&s, &s.measurement()).unwrap();
        assert!((u.mean - s.mean).abs().max() < 1e-12);
        assert!(u.covariance.trace() <= s.covariance.trace());
    }

    #[test]
    fn repeated_updates_converge_to_measurement() {
        let kf = KalmanFilter::default();
        let target = meas(100.0, 50.0, 0.4, 80.0);
        let mut s = kf.initiate(&meas(90.0, 55.0, 0.5, 70.0));
        for _ in 0..100 {
            s = kf.predict(&s);
            s = kf.update(&s, &target).unwrap();
        }
        let y = kf.project(&s).mean;
        let std = kf.noise.position_weight * target.height;
        assert!((y[0] - target.center_u).abs() < std);
        assert!((y[1] - target.center_v).abs() < std);
        assert!((y[2] - target.aspect).abs() < kf.noise.aspect_measurement_std);
        assert!((y[3] - target.height).abs() < std);
    }

    #[test]
    fn gating_distance_examples() {
        let kf = KalmanFilter::default();
        let s = kf.predict(&kf.initiate(&meas(10.0, 20.0, 0.5, 40.0)));
        let d = kf.gating_distance(&s, &[s.measurement()]).unwrap();
        assert_eq!(d, vec![0.0]);

        let identity = ProjectedDistribution {
            mean: MeasurementVector::new(1.0, 2.0, 3.0, 4.0),
            innovation_cov: MeasurementCovariance::identity(),
        };
        let d = identity
            .squared_mahalanobis(&[MeasurementVector::new(2.0, 4.0, 3.0, 1.0)])
            .unwrap();
        assert!((d[0] - 14.0).abs() < 1e-12);
    }

    #[test]
    fn gating_distance_is_translation_invariant() {
        let kf = KalmanFilter::default();
        let s = kf.predict(&kf.initiate(&meas(10.0, 20.0, 0.5, 40.0)));
        let m = meas(13.0, 18.0, 0.55, 42.0);
        let base = kf.gating_distance(&s, &[m]).unwrap()[0];

        let mut shifted = s.clone();
        shifted.mean[0] += 250.0;
        shifted.mean[1] -= 75.0;
        let m2 = meas(m.center_u + 250.0, m.center_v - 75.0, m.aspect, m.height);
        let moved = kf.gating_distance(&shifted, &[m2]).unwrap()[0];
        assert!((base - moved).abs() < 1e-9 * base.max(1.0));
    }

    #[test]
    fn singular_innovation_is_reported() {
        let p = ProjectedDistribution {
            mean: MeasurementVector::zeros(),
            innovation_cov: MeasurementCovariance::zeros(),
        };
        assert!(matches!(
            p.squared_mahalanobis(&[MeasurementVector::zeros()]),
            Err(Error::SingularInnovation)
        ));
    }
}
