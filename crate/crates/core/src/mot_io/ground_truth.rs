use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{csv_rows, label, read_text, FieldParser};
use crate::error::Result;
use crate::model::BoundingBox;

/// Class id of pedestrians in MOT16-style annotations.
const PEDESTRIAN: i64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame: u32,
    pub gt_id: u64,
    pub bbox: BoundingBox,
    /// False for rows that must not take part in evaluation.
    pub valid: bool,
}

/// Parses `frame,id,x,y,w,h[,mark[,class[,visibility]]]` lines.
///
/// A row is valid unless its mark column is 0 or its class column holds a
/// positive class other than pedestrian. Missing or negative class values
/// (as in `-1` placeholder columns) count as pedestrian.
pub fn parse_ground_truth(text: &str, source: &str) -> Result<BTreeMap<u32, Vec<GroundTruthRecord>>> {
    let mut frames: BTreeMap<u32, Vec<GroundTruthRecord>> = BTreeMap::new();
    for (line, fields) in csv_rows(text) {
        let p = FieldParser { label: source, line };
        if fields.len() < 6 {
            return Err(p.error(format!("expected at least 6 columns, found {}", fields.len())));
        }
        let frame = p.frame(&fields)?;
        let id = p.integer(&fields, 1, "id")?;
        let gt_id = u64::try_from(id)
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| p.error(format!("id must be a positive integer, got {id}")))?;
        let bbox = p.bbox(&fields, 2)?;
        let mark = if fields.len() > 6 { p.real(&fields, 6, "mark")? } else { 1.0 };
        let class = if fields.len() > 7 { p.integer(&fields, 7, "class")? } else { -1 };
        let valid = mark != 0.0 && (class <= 0 || class == PEDESTRIAN);

        let entries = frames.entry(frame).or_default();
        if entries.iter().any(|r| r.gt_id == gt_id) {
            return Err(p.error(format!("duplicate id {gt_id} in frame {frame}")));
        }
        entries.push(GroundTruthRecord { frame, gt_id, bbox, valid });
    }
    Ok(frames)
}

pub fn read_ground_truth(path: &Path) -> Result<BTreeMap<u32, Vec<GroundTruthRecord>>> {
    parse_ground_truth(&read_text(path)?, &label(path))
}
