//! Geometry primitives, detections, appearance descriptors and the tracker
//! configuration.

mod config;
mod descriptor;
mod geometry;

use serde::{Deserialize, Serialize};

pub use config::{AssociationMode, TrackerConfig};
pub use descriptor::{normalize_descriptor, AppearanceDescriptor};
pub use geometry::{bbox_to_xyah, iou, xyah_to_bbox, BoundingBox, MeasurementXyah};

/// One detector output for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<AppearanceDescriptor>,
}

impl Detection {
    pub fn new(bbox: BoundingBox, confidence: f64, descriptor: Option<AppearanceDescriptor>) -> Self {
        Self {
            bbox,
            confidence,
            descriptor,
        }
    }
}
