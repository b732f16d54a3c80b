//! Request and response bodies shared by the service and its clients.

use cascadetrack_core::clearmot::DEFAULT_IOU_THRESHOLD;
use cascadetrack_core::gate_check::DEFAULT_SAMPLES;
use cascadetrack_core::mot_io::GroundTruthRecord;
use cascadetrack_core::shapes::{LayerKind, Shape};
use cascadetrack_core::{Detection, FrameOutput, TrackerConfig};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: Uuid,
    /// The configuration the session runs with, defaults filled in.
    pub config: TrackerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: Uuid,
    pub config: TrackerConfig,
    pub frames_processed: u64,
    pub last_frame: Option<u32>,
    pub live_tracks: usize,
    pub confirmed_tracks: usize,
    pub next_track_id: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRequest {
    pub frame_index: u32,
    #[serde(default)]
    pub detections: Vec<Detection>,
}

fn default_iou_threshold() -> f64 {
    DEFAULT_IOU_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateRequest {
    pub ground_truth: Vec<GroundTruthRecord>,
    pub results: Vec<FrameOutput>,
    #[serde(default = "default_iou_threshold")]
    pub iou_threshold: f64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateCheckRequest {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderRequest {
    pub frame_width: u32,
    pub frame_height: u32,
    pub outputs: Vec<FrameOutput>,
    /// Render through this frame; defaults to the last frame with output.
    #[serde(default)]
    pub last_frame: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedFrame {
    pub frame_index: u32,
    pub svg: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderResponse {
    pub frames: Vec<RenderedFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerShape {
    pub name: String,
    pub kind: LayerKind,
    pub output: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkShapes {
    pub input: Shape,
    pub layers: Vec<LayerShape>,
}

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// One of `bad_request`, `validation`, `not_found`, `internal`.
    pub error: String,
    pub message: String,
}
