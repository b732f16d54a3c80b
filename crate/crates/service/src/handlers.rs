use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use cascadetrack_core::clearmot::{evaluate_sequence, MetricsReport};
use cascadetrack_core::gate_check::{run_gate_check, GateCheckReport};
use cascadetrack_core::mot_io::GroundTruthRecord;
use cascadetrack_core::render::render_sequence;
use cascadetrack_core::shapes::{descriptor_network, propagate_shapes, DESCRIPTOR_INPUT};
use cascadetrack_core::{FrameOutput, TrackerConfig};
use serde::de::DeserializeOwned;
use uuid::Uuid;

use crate::api::*;
use crate::error::ApiError;
use crate::AppState;

/// Gate threshold used by the diagnostics endpoint; the tracker default.
fn gate_threshold() -> f64 {
    TrackerConfig::default().mahalanobis_threshold
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    Ok(serde_json::from_slice(body)?)
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))?
}

pub async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

/// An empty body creates a session with default settings.
pub async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionCreated>), ApiError> {
    let config = if body.iter().all(u8::is_ascii_whitespace) {
        TrackerConfig::default()
    } else {
        let text = std::str::from_utf8(&body).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        // malformed JSON is a 400; only well-formed but unacceptable settings are 422
        serde_json::from_str::<serde_json::Value>(text)?;
        TrackerConfig::from_json_str(text)?
    };
    let (session_id, config) = state.sessions.create(config)?;
    tracing::info!(%session_id, "session created");
    Ok((StatusCode::CREATED, Json(SessionCreated { session_id, config })))
}

pub async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<Uuid>) -> Result<Json<SessionInfo>, ApiError> {
    let session = state.sessions.get(id)?;
    let info = session.lock().expect("session poisoned").info(id);
    Ok(Json(info))
}

pub async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<Uuid>) -> Result<StatusCode, ApiError> {
    state.sessions.remove(id)?;
    tracing::info!(session_id = %id, "session closed");
    Ok(StatusCode::NO_CONTENT)
}

pub async fn step_frame(
    State(state): State<Arc<AppState>>,
    Path(id): Path<Uuid>,
    body: Bytes,
) -> Result<Json<FrameOutput>, ApiError> {
    let request: FrameRequest = parse(&body)?;
    let session = state.sessions.get(id)?;
    let output = blocking(move || {
        let mut session = session.lock().expect("session poisoned");
        let output = session.tracker.step(request.frame_index, &request.detections)?;
        session.frames_processed += 1;
        Ok(output)
    })
    .await?;
    Ok(Json(output))
}

fn group_ground_truth(records: Vec<GroundTruthRecord>) -> Result<BTreeMap<u32, Vec<GroundTruthRecord>>, ApiError> {
    let mut by_frame: BTreeMap<u32, Vec<GroundTruthRecord>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert((r.frame, r.gt_id)) {
            return Err(ApiError::Validation(format!(
                "ground-truth id {} appears twice in frame {}",
                r.gt_id, r.frame
            )));
        }
        by_frame.entry(r.frame).or_default().push(r);
    }
    Ok(by_frame)
}

pub async fn evaluate(body: Bytes) -> Result<Json<MetricsReport>, ApiError> {
    let request: EvaluateRequest = parse(&body)?;
    if !(request.iou_threshold > 0.0 && request.iou_threshold <= 1.0) {
        return Err(ApiError::Validation(format!(
            "iou_threshold must lie in (0, 1], got {}",
            request.iou_threshold
        )));
    }
    let report = blocking(move || {
        let gt = group_ground_truth(request.ground_truth)?;
        Ok(evaluate_sequence(&gt, &request.results, request.iou_threshold)?)
    })
    .await?;
    Ok(Json(report))
}

pub async fn gate_check(body: Bytes) -> Result<Json<GateCheckReport>, ApiError> {
    let request: GateCheckRequest = if body.is_empty() {
        parse(&Bytes::from_static(b"{}"))?
    } else {
        parse(&body)?
    };
    let report = blocking(move || Ok(run_gate_check(request.samples, request.seed, gate_threshold())?)).await?;
    Ok(Json(report))
}

pub async fn render(body: Bytes) -> Result<Json<RenderResponse>, ApiError> {
    let request: RenderRequest = parse(&body)?;
    if request.frame_width == 0 || request.frame_height == 0 {
        return Err(ApiError::Validation("frame size must be positive".into()));
    }
    let frames = blocking(move || {
        Ok(render_sequence(&request.outputs, request.frame_width, request.frame_height, request.last_frame)
            .into_iter()
            .map(|(frame_index, svg)| RenderedFrame { frame_index, svg })
            .collect())
    })
    .await?;
    Ok(Json(RenderResponse { frames }))
}

pub async fn descriptor_network_shapes() -> Result<Json<NetworkShapes>, ApiError> {
    let layers = descriptor_network();
    let shapes = propagate_shapes(&layers, DESCRIPTOR_INPUT)?;
    Ok(Json(NetworkShapes {
        input: DESCRIPTOR_INPUT,
        layers: layers
            .into_iter()
            .zip(shapes)
            .map(|(l, output)| LayerShape {
                name: l.name,
                kind: l.kind,
                output,
            })
            .collect(),
    }))
}

pub async fn fallback() -> ApiError {
    ApiError::NotFound("no such endpoint".into())
}
