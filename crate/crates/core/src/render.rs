//! SVG overlays of tracker output, one document per frame.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::tracker::{FrameOutput, TrackOutput};

/// Stable hue for a track id.
pub fn track_hue(id: u64) -> u32 {
    // splitmix64 finalizer
    let mut z = id.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z % 360) as u32
}

pub fn track_color(id: u64) -> String {
    format!("hsl({},85%,45%)", track_hue(id))
}

pub fn render_frame(tracks: &[TrackOutput], width: u32, height: u32) -> String {
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" style="background:#ffffff">"#
    )
    .unwrap();
    for t in tracks {
        let b = &t.bbox;
        let color = track_color(t.track_id);
        writeln!(
            svg,
            r#"  <rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            b.top_left_x, b.top_left_y, b.width, b.height
        )
        .unwrap();
        writeln!(
            svg,
            r#"  <text x="{:.2}" y="{:.2}" fill="{color}" font-family="monospace" font-size="12">{}</text>"#,
            b.top_left_x,
            b.top_left_y - 3.0,
            t.track_id
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// One SVG per frame from 1 through `last_frame` (default: the last frame
/// with output). Frames without output render as empty canvases.
pub fn render_sequence(
    outputs: &[FrameOutput],
    width: u32,
    height: u32,
    last_frame: Option<u32>,
) -> Vec<(u32, String)> {
    let by_frame: BTreeMap<u32, &[TrackOutput]> = outputs
        .iter()
        .map(|f| (f.frame_index, f.tracks.as_slice()))
        .collect();
    let last = last_frame.or_else(|| by_frame.keys().next_back().copied()).unwrap_or(0);
    (1..=last)
        .map(|f| (f, render_frame(by_frame.get(&f).copied().unwrap_or(&[]), width, height)))
        .collect()
}
