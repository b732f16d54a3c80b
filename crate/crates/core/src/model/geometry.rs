//! Pixel-space boxes and the (u, v, aspect, height) measurement form used by
//! the Kalman filter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box stored as top-left corner plus extent, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub top_left_x: f64,
    pub top_left_y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    /// Builds a box, rejecting non-finite coordinates and non-positive extents.
    pub fn new(top_left_x: f64, top_left_y: f64, width: f64, height: f64) -> Result<Self> {
        let b = Self {
            top_left_x,
            top_left_y,
            width,
            height,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.top_left_x, self.top_left_y, self.width, self.height]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidBox(format!("non-finite coordinate in {self:?}")));
        }
        if self.width <= 0.0 || self.height <= 0.0 {
            return Err(Error::InvalidBox(format!(
                "width and height must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn right(&self) -> f64 {
        self.top_left_x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top_left_y + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn to_xyah(&self) -> MeasurementXyah {
        bbox_to_xyah(self)
    }
}

/// Box center, aspect ratio (width / height) and height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementXyah {
    pub center_u: f64,
    pub center_v: f64,
    pub aspect: f64,
    pub height: f64,
}

impl MeasurementXyah {
    pub fn to_bbox(&self) -> BoundingBox {
        xyah_to_bbox(self)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.center_u, self.center_v, self.aspect, self.height]
    }
}

pub fn bbox_to_xyah(b: &BoundingBox) -> MeasurementXyah {
    MeasurementXyah {
        center_u: b.top_left_x + b.width / 2.0,
        center_v: b.top_left_y + b.height / 2.0,
        aspect: b.width / b.height,
        height: b.height,
    }
}

pub fn xyah_to_bbox(m: &MeasurementXyah) -> BoundingBox {
    let width = m.aspect * m.height;
    BoundingBox {
        top_left_x: m.center_u - width / 2.0,
        top_left_y: m.center_v - m.height / 2.0,
        width,
        height: m.height,
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.right().min(b.right()) - a.top_left_x.max(b.top_left_x);
    let ih = a.bottom().min(b.bottom()) - a.top_left_y.max(b.top_left_y);
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
