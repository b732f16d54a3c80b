//! Thin async client for the cascadetrack HTTP service. Request and response
//! types are the service's own [`api`] module.

use cascadetrack_core::clearmot::MetricsReport;
use cascadetrack_core::gate_check::GateCheckReport;
use cascadetrack_core::{Detection, FrameOutput, TrackerConfig};
use reqwest::{Method, RequestBuilder, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use uuid::Uuid;

pub use cascadetrack_service::api;
use api::*;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service rejected the request content (400 or 422).
    #[error("{message}")]
    Validation { status: u16, message: String },
    #[error("{0}")]
    NotFound(String),
    #[error("cannot reach service: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("service error {status}: {message}")]
    Server { status: u16, message: String },
}

pub type Result<T, E = ClientError> = std::result::Result<T, E>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base_url` like `http://127.0.0.1:8080`, without a trailing path.
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{}", self.base, path))
    }

    async fn send<T: DeserializeOwned>(req: RequestBuilder) -> Result<T> {
        let resp = check(req.send().await?).await?;
        Ok(resp.json().await?)
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        Self::send(self.request(Method::POST, path).json(body)).await
    }

    pub async fn health(&self) -> Result<Health> {
        Self::send(self.request(Method::GET, "/health")).await
    }

    pub async fn create_session(&self, config: &TrackerConfig) -> Result<SessionCreated> {
        self.post("/v1/sessions", config).await
    }

    /// Sends config text as is, so the service reports unknown keys itself.
    pub async fn create_session_raw(&self, config_json: impl Into<String>) -> Result<SessionCreated> {
        let req = self
            .request(Method::POST, "/v1/sessions")
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(config_json.into());
        Self::send(req).await
    }

    pub async fn session(&self, id: Uuid) -> Result<SessionInfo> {
        Self::send(self.request(Method::GET, &format!("/v1/sessions/{id}"))).await
    }

    pub async fn close_session(&self, id: Uuid) -> Result<()> {
        check(self.request(Method::DELETE, &format!("/v1/sessions/{id}")).send().await?).await?;
        Ok(())
    }

    pub async fn step(&self, id: Uuid, frame_index: u32, detections: &[Detection]) -> Result<FrameOutput> {
        #[derive(Serialize)]
        struct Body<'a> {
            frame_index: u32,
            detections: &'a [Detection],
        }
        self.post(&format!("/v1/sessions/{id}/frames"), &Body { frame_index, detections })
            .await
    }

    pub async fn evaluate(&self, request: &EvaluateRequest) -> Result<MetricsReport> {
        self.post("/v1/evaluate", request).await
    }

    pub async fn gate_check(&self, samples: usize, seed: u64) -> Result<GateCheckReport> {
        self.post("/v1/diagnostics/gate-check", &GateCheckRequest { samples, seed }).await
    }

    pub async fn render(&self, request: &RenderRequest) -> Result<RenderResponse> {
        self.post("/v1/render", request).await
    }

    pub async fn descriptor_network(&self) -> Result<NetworkShapes> {
        Self::send(self.request(Method::GET, "/v1/descriptor-network")).await
    }
}

async fn check(resp: reqwest::Response) -> Result<reqwest::Response> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let text = resp.text().await?;
    let message = serde_json::from_str::<ErrorBody>(&text)
        .map(|b| b.message)
        .unwrap_or(text);
    Err(match status {
        StatusCode::NOT_FOUND => ClientError::NotFound(message),
        StatusCode::BAD_REQUEST | StatusCode::UNPROCESSABLE_ENTITY => ClientError::Validation {
            status: status.as_u16(),
            message,
        },
        _ => ClientError::Server {
            status: status.as_u16(),
            message,
        },
    })
}
