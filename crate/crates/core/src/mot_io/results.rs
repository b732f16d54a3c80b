use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{csv_rows, label, read_text, write_text, FieldParser};
use crate::error::Result;
use crate::tracker::{FrameOutput, TrackOutput};

/// `frame,id,x,y,w,h,1,-1,-1,-1` per reported box, two decimals, sorted by
/// frame then id.
pub fn format_results(outputs: &[FrameOutput]) -> String {
    let mut rows: Vec<(u32, &TrackOutput)> = outputs
        .iter()
        .flat_map(|f| f.tracks.iter().map(move |t| (f.frame_index, t)))
        .collect();
    rows.sort_by_key(|(frame, t)| (*frame, t.track_id));

    let mut out = String::new();
    for (frame, t) in rows {
        let b = &t.bbox;
        writeln!(
            out,
            "{},{},{:.2},{:.2},{:.2},{:.2},1,-1,-1,-1",
            frame, t.track_id, b.top_left_x, b.top_left_y, b.width, b.height
        )
        .unwrap();
    }
    out
}

pub fn write_results(outputs: &[FrameOutput], path: &Path) -> Result<()> {
    write_text(path, &format_results(outputs))
}

/// Parses a result file into per-frame outputs, ascending by frame and id.
pub fn parse_results(text: &str, source: &str) -> Result<Vec<FrameOutput>> {
    let mut frames: BTreeMap<u32, Vec<TrackOutput>> = BTreeMap::new();
    for (line, fields) in csv_rows(text) {
        let p = FieldParser { label: source, line };
        if fields.len() < 6 {
            return Err(p.error(format!("expected at least 6 columns, found {}", fields.len())));
        }
        let frame = p.frame(&fields)?;
        let id = p.integer(&fields, 1, "id")?;
        let track_id = u64::try_from(id)
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| p.error(format!("id must be a positive integer, got {id}")))?;
        let bbox = p.bbox(&fields, 2)?;
        let entries = frames.entry(frame).or_default();
        if entries.iter().any(|t| t.track_id == track_id) {
            return Err(p.error(format!("duplicate id {track_id} in frame {frame}")));
        }
        entries.push(TrackOutput { track_id, bbox });
    }
    Ok(frames
        .into_iter()
        .map(|(frame_index, mut tracks)| {
            tracks.sort_by_key(|t| t.track_id);
            FrameOutput { frame_index, tracks }
        })
        .collect())
}

pub fn read_results(path: &Path) -> Result<Vec<FrameOutput>> {
    parse_results(&read_text(path)?, &label(path))
}
