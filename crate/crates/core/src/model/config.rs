use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How detections are associated with existing tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssociationMode {
    /// Appearance/motion matching cascade followed by the IoU stage.
    #[default]
    Cascade,
    /// IoU stage only; no appearance information is used.
    IouOnly,
}

/// Every tunable constant of the tracker.
///
/// Deserialization is strict: unknown keys are rejected so that a misspelled
/// threshold cannot silently fall back to its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Weight of the Mahalanobis term in the combined cost; 0 uses appearance only.
    pub lambda: f64,
    /// Chi-square gate on the squared Mahalanobis distance (4 dof, 95%).
    pub mahalanobis_threshold: f64,
    /// Gate on the smallest cosine distance to a track's gallery.
    pub cosine_threshold: f64,
    /// Frames a confirmed track may go unmatched before deletion.
    pub max_age: u32,
    /// Consecutive associations (including birth) needed for confirmation.
    pub n_init: u32,
    /// Number of past descriptors kept per track.
    pub gallery_budget: usize,
    /// Detections below this confidence are dropped at ingestion.
    pub min_confidence: f64,
    /// IoU-stage gate on `1 - iou`.
    pub iou_max_cost: f64,
    pub feature_dim: usize,
    pub association: AssociationMode,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            mahalanobis_threshold: 9.4877,
            cosine_threshold: 0.2,
            max_age: 30,
            n_init: 3,
            gallery_budget: 100,
            min_confidence: 0.3,
            iou_max_cost: 0.7,
            feature_dim: 128,
            association: AssociationMode::Cascade,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must lie in [0, 1]");
        }
        if !(self.mahalanobis_threshold > 0.0 && self.mahalanobis_threshold.is_finite()) {
            return bad("mahalanobis_threshold must be positive");
        }
        if !(self.cosine_threshold > 0.0 && self.cosine_threshold.is_finite()) {
            return bad("cosine_threshold must be positive");
        }
        if !(self.iou_max_cost > 0.0 && self.iou_max_cost <= 1.0) {
            return bad("iou_max_cost must lie in (0, 1]");
        }
        if !self.min_confidence.is_finite() {
            return bad("min_confidence must be finite");
        }
        if self.max_age < 1 {
            return bad("max_age must be at least 1");
        }
        if self.n_init < 1 {
            return bad("n_init must be at least 1");
        }
        if self.gallery_budget < 1 {
            return bad("gallery_budget must be at least 1");
        }
        if self.feature_dim < 1 {
            return bad("feature_dim must be at least 1");
        }
        Ok(())
    }

    /// Parses a flat JSON object of overrides and validates the result.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: TrackerConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = TrackerConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.mahalanobis_threshold, 9.4877);
        assert_eq!(cfg.gallery_budget, 100);
        assert_eq!(cfg.min_confidence, 0.3);
        assert_eq!(cfg.max_age, 30);
    }

    #[test]
    fn partial_json_overrides_defaults() {
        let cfg = TrackerConfig::from_json_str(r#"{"lambda": 0.5, "max_age": 10}"#).unwrap();
        assert_eq!(cfg.lambda, 0.5);
        assert_eq!(cfg.max_age, 10);
        assert_eq!(cfg.n_init, 3);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = TrackerConfig::from_json_str(r#"{"lamda": 0.5}"#).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
    }

    #[test]
    fn out_of_range_values_rejected() {
        assert!(TrackerConfig::from_json_str(r#"{"lambda": 1.5}"#).is_err());
        assert!(TrackerConfig::from_json_str(r#"{"max_age": 0}"#).is_err());
        assert!(TrackerConfig::from_json_str(r#"{"cosine_threshold": 0}"#).is_err());
    }
}
