use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO_NORM: f64 = 1e-12;

/// A unit-norm appearance embedding.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AppearanceDescriptor(Vec<f64>);

impl AppearanceDescriptor {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &AppearanceDescriptor) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for AppearanceDescriptor {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for AppearanceDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        let dim = raw.len();
        normalize_descriptor(raw, dim).map_err(serde::de::Error::custom)
    }
}

/// Scales `v` to unit length. Fails on a near-zero vector or when the length
/// differs from `feature_dim`.
pub fn normalize_descriptor(v: impl Into<Vec<f64>>, feature_dim: usize) -> Result<AppearanceDescriptor> {
    let mut v = v.into();
    if v.len() != feature_dim {
        return Err(Error::DimensionMismatch {
            expected: feature_dim,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::ZeroVector);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < ZERO_NORM {
        return Err(Error::ZeroVector);
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(AppearanceDescriptor(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_input_is_unchanged() {
        let d = normalize_descriptor(vec![0.0, 1.0, 0.0], 3).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn three_four_five() {
        let mut v = vec![0.0; 128];
        v[0] = 3.0;
        v[1] = 4.0;
        let d = normalize_descriptor(v, 128).unwrap();
        assert!((d[0] - 0.6).abs() < 1e-15);
        assert!((d[1] - 0.8).abs() < 1e-15);
        assert!(d[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(normalize_descriptor(vec![0.0; 4], 4), Err(Error::ZeroVector)));
        assert!(matches!(
            normalize_descriptor(vec![1.0; 3], 4),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    proptest! {
        #[test]
        fn output_has_unit_norm(v in prop::collection::vec(-1e3..1e3f64, 16)) {
            prop_assume!(v.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-6);
            let d = normalize_descriptor(v, 16).unwrap();
            prop_assert!((d.dot(&d).sqrt() - 1.0).abs() < 1e-6);
        }
    }
}
