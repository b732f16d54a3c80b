use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{csv_rows, label, read_features, read_text, write_text, FeatureMatrix, FieldParser};
use crate::error::{Error, Result};
use crate::model::{normalize_descriptor, BoundingBox, Detection, TrackerConfig};

const BASE_COLUMNS: usize = 10;

/// One line of a detection file.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub frame: u32,
    pub bbox: BoundingBox,
    pub confidence: f64,
    /// Row in the feature matrix that belongs to this line.
    pub feature_row_index: Option<usize>,
}

/// Detections grouped by frame. Every frame that appears in the file has an
/// entry, even if all of its detections fell below the confidence cut.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionSet {
    pub frames: BTreeMap<u32, Vec<Detection>>,
}

impl DetectionSet {
    pub fn first_frame(&self) -> Option<u32> {
        self.frames.keys().next().copied()
    }

    pub fn last_frame(&self) -> Option<u32> {
        self.frames.keys().next_back().copied()
    }

    /// Detections for every frame from the first to the last, filling gaps
    /// with empty frames.
    pub fn dense_frames(&self) -> Vec<(u32, &[Detection])> {
        let (Some(first), Some(last)) = (self.first_frame(), self.last_frame()) else {
            return Vec::new();
        };
        (first..=last)
            .map(|f| (f, self.frames.get(&f).map_or(&[][..], Vec::as_slice)))
            .collect()
    }

    pub fn detection_count(&self) -> usize {
        self.frames.values().map(Vec::len).sum()
    }
}

/// Parses detection lines. Lines with more than ten columns carry their
/// features inline; those are returned as a matrix aligned with the records.
pub fn parse_detection_records(
    text: &str,
    source: &str,
    feature_dim: usize,
) -> Result<(Vec<DetectionRecord>, Option<FeatureMatrix>)> {
    let mut records = Vec::new();
    let mut inline: Vec<f32> = Vec::new();
    let mut inline_mode: Option<bool> = None;

    for (line, fields) in csv_rows(text) {
        let p = FieldParser { label: source, line };
        if fields.len() < BASE_COLUMNS {
            return Err(p.error(format!("expected at least {BASE_COLUMNS} columns, found {}", fields.len())));
        }
        let has_inline = fields.len() > BASE_COLUMNS;
        match inline_mode {
            None => inline_mode = Some(has_inline),
            Some(mode) if mode != has_inline => {
                return Err(p.error("inline features present on some lines but not others"));
            }
            _ => {}
        }
        if has_inline && fields.len() != BASE_COLUMNS + feature_dim {
            return Err(Error::DimensionMismatch {
                expected: feature_dim,
                found: fields.len() - BASE_COLUMNS,
            });
        }

        let frame = p.frame(&fields)?;
        let bbox = p.bbox(&fields, 2)?;
        let confidence = p.real(&fields, 6, "confidence")?;
        if has_inline {
            for k in BASE_COLUMNS..fields.len() {
                inline.push(p.real(&fields, k, "feature")? as f32);
            }
        }
        let index = records.len();
        records.push(DetectionRecord {
            frame,
            bbox,
            confidence,
            feature_row_index: has_inline.then_some(index),
        });
    }

    let features = (inline_mode == Some(true)).then_some(FeatureMatrix {
        rows: records.len(),
        dim: feature_dim,
        data: inline,
    });
    Ok((records, features))
}

/// Pairs records with feature rows by line order, drops records below
/// `cfg.min_confidence` and normalizes the surviving descriptors.
pub fn attach_features(
    mut records: Vec<DetectionRecord>,
    features: Option<&FeatureMatrix>,
    cfg: &TrackerConfig,
) -> Result<DetectionSet> {
    if let Some(fm) = features {
        if fm.rows != records.len() {
            return Err(Error::RowCountMismatch {
                detections: records.len(),
                features: fm.rows,
            });
        }
        if fm.dim != cfg.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: cfg.feature_dim,
                found: fm.dim,
            });
        }
        for (i, r) in records.iter_mut().enumerate() {
            r.feature_row_index = Some(i);
        }
    }

    let mut set = DetectionSet::default();
    for r in records {
        let frame = set.frames.entry(r.frame).or_default();
        if r.confidence < cfg.min_confidence {
            continue;
        }
        let descriptor = match (features, r.feature_row_index) {
            (Some(fm), Some(i)) => {
                let raw: Vec<f64> = fm.row(i).iter().map(|&v| f64::from(v)).collect();
                Some(normalize_descriptor(raw, cfg.feature_dim)?)
            }
            _ => None,
        };
        frame.push(Detection::new(r.bbox, r.confidence, descriptor));
    }
    Ok(set)
}

/// Reads a detection file plus an optional sidecar feature container.
pub fn read_detections(det_path: &Path, feature_path: Option<&Path>, cfg: &TrackerConfig) -> Result<DetectionSet> {
    let text = read_text(det_path)?;
    let (records, inline) = parse_detection_records(&text, &label(det_path), cfg.feature_dim)?;
    let sidecar = feature_path.map(read_features).transpose()?;
    let features = match (sidecar, inline) {
        (Some(_), Some(_)) => {
            return Err(Error::Parse {
                path: label(det_path),
                line: 0,
                reason: "inline features and a feature file were both supplied".into(),
            })
        }
        (Some(f), None) | (None, Some(f)) => Some(f),
        (None, None) => None,
    };
    attach_features(records, features.as_ref(), cfg)
}

/// Canonical ten-column form, shortest round-trip float spelling.
pub fn format_detections(records: &[DetectionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let b = &r.bbox;
        writeln!(
            out,
            "{},-1,{},{},{},{},{},-1,-1,-1",
            r.frame, b.top_left_x, b.top_left_y, b.width, b.height, r.confidence
        )
        .unwrap();
    }
    out
}

pub fn write_detections(path: &Path, records: &[DetectionRecord]) -> Result<()> {
    write_text(path, &format_detections(records))
}
