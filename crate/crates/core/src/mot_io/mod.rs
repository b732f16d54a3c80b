//! Readers and writers for MOT-challenge style text files and the binary
//! appearance-feature container.
//!
//! All text formats are comma separated, headerless and parsed with `.` as
//! the only decimal separator.

mod detections;
mod features;
mod ground_truth;
mod results;

use std::path::Path;

pub use detections::{
    attach_features, format_detections, parse_detection_records, read_detections, write_detections,
    DetectionRecord, DetectionSet,
};
pub use features::{decode_features, encode_features, read_features, write_features, FeatureMatrix, FEATURE_MAGIC};
pub use ground_truth::{parse_ground_truth, read_ground_truth, GroundTruthRecord};
pub use results::{format_results, parse_results, read_results, write_results};

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-empty lines with their 1-based line numbers, split on commas.
pub(crate) fn csv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect()))
}

pub(crate) struct FieldParser<'a> {
    pub label: &'a str,
    pub line: usize,
}

impl FieldParser<'_> {
    pub fn error(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            path: self.label.to_string(),
            line: self.line,
            reason: reason.into(),
        }
    }

    pub fn real(&self, fields: &[&str], idx: usize, name: &str) -> Result<f64> {
        let raw = fields
            .get(idx)
            .ok_or_else(|| self.error(format!("missing column {} ({name})", idx + 1)))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| self.error(format!("column {} ({name}): not a number: {raw:?}", idx + 1)))?;
        if !v.is_finite() {
            return Err(self.error(format!("column {} ({name}): not finite", idx + 1)));
        }
        Ok(v)
    }

    /// Integer column; accepts integral decimal spellings such as `3.0`.
    pub fn integer(&self, fields: &[&str], idx: usize, name: &str) -> Result<i64> {
        let v = self.real(fields, idx, name)?;
        if v.fract() != 0.0 || v.abs() > 2f64.powi(53) {
            return Err(self.error(format!("column {} ({name}): not an integer", idx + 1)));
        }
        Ok(v as i64)
    }

    pub fn frame(&self, fields: &[&str]) -> Result<u32> {
        let f = self.integer(fields, 0, "frame")?;
        u32::try_from(f)
            .ok()
            .filter(|&f| f >= 1)
            .ok_or_else(|| self.error(format!("frame must be a positive integer, got {f}")))
    }

    pub fn bbox(&self, fields: &[&str], first: usize) -> Result<crate::model::BoundingBox> {
        let x = self.real(fields, first, "x")?;
        let y = self.real(fields, first + 1, "y")?;
        let w = self.real(fields, first + 2, "width")?;
        let h = self.real(fields, first + 3, "height")?;
        crate::model::BoundingBox::new(x, y, w, h).map_err(|e| self.error(e.to_string()))
    }
}

pub(crate) fn label(path: &Path) -> String {
    path.display().to_string()
}
