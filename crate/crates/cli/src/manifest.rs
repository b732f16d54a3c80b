use std::path::{Path, PathBuf};

use cascadetrack_core::TrackerConfig;
use serde::{Deserialize, Serialize};

/// Record of one tracking run, written next to the results on request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub sequence: String,
    pub detections: PathBuf,
    pub features: Option<PathBuf>,
    pub config: TrackerConfig,
    pub output: PathBuf,
    pub frame_count: usize,
    pub detection_count: usize,
    pub track_count: usize,
    pub wall_clock_ms: f64,
    pub frames_per_second: f64,
}

/// Sequence name from a detection path: `MOT16-02/det/det.txt` gives
/// `MOT16-02`, anything else the file stem.
pub fn sequence_name(detections: &Path) -> String {
    let parent = detections.parent();
    if parent.and_then(Path::file_name).is_some_and(|n| n == "det") {
        if let Some(seq) = parent.and_then(Path::parent).and_then(Path::file_name) {
            return seq.to_string_lossy().into_owned();
        }
    }
    detections
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into())
}
