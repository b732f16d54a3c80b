//! HTTP/JSON front end for the tracker.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/health` | | [`api::Health`] |
//! | POST | `/v1/sessions` | tracker config JSON (may be empty) | [`api::SessionCreated`] |
//! | GET | `/v1/sessions/{id}` | | [`api::SessionInfo`] |
//! | DELETE | `/v1/sessions/{id}` | | 204 |
//! | POST | `/v1/sessions/{id}/frames` | [`api::FrameRequest`] | `FrameOutput` |
//! | POST | `/v1/evaluate` | [`api::EvaluateRequest`] | `MetricsReport` |
//! | POST | `/v1/diagnostics/gate-check` | [`api::GateCheckRequest`] | `GateCheckReport` |
//! | POST | `/v1/render` | [`api::RenderRequest`] | [`api::RenderResponse`] |
//! | GET | `/v1/descriptor-network` | | [`api::NetworkShapes`] |
//!
//! Errors carry an [`api::ErrorBody`]: 400 for malformed JSON, 404 for
//! unknown sessions, 422 for input the tracker rejects.

pub mod api;
mod error;
mod handlers;
mod sessions;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use tokio::net::{TcpListener, ToSocketAddrs};
use tokio::task::JoinHandle;

pub use error::ApiError;
pub use sessions::SessionStore;

#[derive(Debug, Default)]
pub struct AppState {
    pub sessions: SessionStore,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(handlers::health))
        .route("/v1/sessions", post(handlers::create_session))
        .route(
            "/v1/sessions/{id}",
            get(handlers::get_session).delete(handlers::delete_session),
        )
        .route("/v1/sessions/{id}/frames", post(handlers::step_frame))
        .route("/v1/evaluate", post(handlers::evaluate))
        .route("/v1/diagnostics/gate-check", post(handlers::gate_check))
        .route("/v1/render", post(handlers::render))
        .route("/v1/descriptor-network", get(handlers::descriptor_network_shapes))
        .fallback(handlers::fallback)
        .with_state(state)
}

/// Serves on an already bound listener until the task is dropped.
pub async fn serve(listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::new(AppState::default()))).await
}

/// A server running on a background task.
pub struct RunningServer {
    pub addr: SocketAddr,
    pub handle: JoinHandle<std::io::Result<()>>,
}

impl RunningServer {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        self.handle.abort();
    }
}

/// Binds `addr` (port 0 picks a free port) and serves in the background.
pub async fn spawn(addr: impl ToSocketAddrs) -> std::io::Result<RunningServer> {
    let listener = TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let handle = tokio::spawn(serve(listener));
    Ok(RunningServer { addr, handle })
}
