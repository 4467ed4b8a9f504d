//! Clients for the routing service and for the public road-weather API.

mod live;

use std::time::Duration;

use reqwest::{Response, StatusCode};
use rwroute_core::api::{FieldError, RouteRequest};
use rwroute_core::fusion::LengthMode;
use serde_json::Value;

pub use live::fetch_live_snapshot;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("server returned {status}: {error}{}", fmt_fields(.fields))]
    Api { status: u16, error: String, fields: Vec<FieldError> },
    #[error("unexpected payload: {0}")]
    Payload(String),
    #[error(transparent)]
    Core(#[from] rwroute_core::Error),
}

fn fmt_fields(fields: &[FieldError]) -> String {
    fields.iter().map(|f| format!("\n  {}: {}", f.field, f.message)).collect()
}

impl ClientError {
    /// Same exit code contract as the core error type.
    pub fn exit_code(&self) -> i32 {
        match self {
            ClientError::Transport(_) => 4,
            ClientError::Api { status: 422, .. } => 3,
            ClientError::Api { status, .. } if *status >= 500 => 4,
            ClientError::Api { .. } | ClientError::Payload(_) => 2,
            ClientError::Core(e) => e.exit_code(),
        }
    }
}

impl From<reqwest::Error> for ClientError {
    fn from(e: reqwest::Error) -> Self {
        if e.is_decode() {
            ClientError::Payload(e.to_string())
        } else {
            ClientError::Transport(e.to_string())
        }
    }
}

/// Talks to a running `serve` instance.
#[derive(Debug, Clone)]
pub struct ServiceClient {
    base: String,
    http: reqwest::Client,
}

impl ServiceClient {
    pub fn new(base_url: &str) -> Result<Self, ClientError> {
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(ServiceClient { base: base_url.trim_end_matches('/').to_string(), http })
    }

    pub async fn scenarios(&self) -> Result<Value, ClientError> {
        self.get("/api/scenarios").await
    }

    pub async fn network(&self) -> Result<Value, ClientError> {
        self.get("/api/network").await
    }

    pub async fn weights(&self, scenario: &str, mode: LengthMode) -> Result<Value, ClientError> {
        self.get(&format!("/api/weights/{scenario}?length_mode={mode}")).await
    }

    pub async fn route(&self, req: &RouteRequest) -> Result<Value, ClientError> {
        let resp = self.http.post(format!("{}/api/route", self.base)).json(req).send().await?;
        decode(resp).await
    }

    async fn get(&self, path: &str) -> Result<Value, ClientError> {
        let resp = self.http.get(format!("{}{path}", self.base)).send().await?;
        decode(resp).await
    }
}

async fn decode(resp: Response) -> Result<Value, ClientError> {
    let status = resp.status();
    let body: Value = resp.json().await?;
    if status == StatusCode::OK {
        return Ok(body);
    }
    let error = body.get("error").and_then(Value::as_str).unwrap_or("request failed").to_string();
    let fields = body
        .get("fields")
        .cloned()
        .map(serde_json::from_value)
        .transpose()
        .map_err(|e| ClientError::Payload(e.to_string()))?
        .unwrap_or_default();
    Err(ClientError::Api { status: status.as_u16(), error, fields })
}
