//! HTTP/JSON service over a loaded scenario catalog.
//!
//! ```text
//! GET  /api/scenarios            scenario summaries
//! GET  /api/network              network GeoJSON
//! GET  /api/weights/{scenario}   weight map GeoJSON (?length_mode=raw|normalized)
//! POST /api/route                route GeoJSON Feature
//! ```

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use rwroute_core::api::{parse_route_request, FieldError};
use rwroute_core::error::{Error, RouteError};
use rwroute_core::fusion::LengthMode;
use rwroute_core::graph::geojson::network_to_geojson;
use rwroute_core::pipeline::{to_pretty, weights_document, ScenarioCatalog};

#[derive(Clone)]
struct AppState {
    catalog: Arc<ScenarioCatalog>,
    network_doc: Arc<String>,
}

/// Error body: `{"error": "...", "fields": [{"field", "message"}]}`.
#[derive(Debug, Serialize)]
struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    fields: Vec<FieldError>,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>) -> Self {
        ApiError { status, error: error.into(), fields: Vec::new() }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownScenario(_) => StatusCode::NOT_FOUND,
            Error::Route(RouteError::NoRoute { .. }) => StatusCode::UNPROCESSABLE_ENTITY,
            Error::Route(RouteError::InvalidPreference(_)) | Error::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = to_pretty(&serde_json::to_value(&self).expect("error serializes"));
        (self.status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

fn json_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn scenarios(State(s): State<AppState>) -> Response {
    json_response(to_pretty(&json!(s.catalog.summaries())))
}

async fn network(State(s): State<AppState>) -> Response {
    json_response(s.network_doc.as_str().to_owned())
}

async fn weights(
    State(s): State<AppState>,
    Path(name): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<Response, ApiError> {
    let mode = match q.get("length_mode") {
        None => LengthMode::default(),
        Some(m) => m.parse::<LengthMode>().map_err(|e| ApiError {
            status: StatusCode::BAD_REQUEST,
            error: "invalid query".into(),
            fields: vec![FieldError { field: "length_mode".into(), message: e }],
        })?,
    };
    let sc = s.catalog.get(&name)?;
    Ok(json_response(to_pretty(&weights_document(&s.catalog.network, sc.weights(mode)))))
}

async fn route(State(s): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let value: Value = serde_json::from_slice(&body).map_err(|e| ApiError {
        status: StatusCode::BAD_REQUEST,
        error: "request body is not valid JSON".into(),
        fields: vec![FieldError { field: String::new(), message: e.to_string() }],
    })?;
    let req = parse_route_request(&value).map_err(|fields| ApiError {
        status: StatusCode::BAD_REQUEST,
        error: "invalid route request".into(),
        fields,
    })?;
    let doc = s.catalog.plan(&req)?;
    Ok(json_response(to_pretty(&doc)))
}

/// The service router. `static_dir`, when given, is served for every
/// path outside `/api`.
pub fn router(catalog: Arc<ScenarioCatalog>, static_dir: Option<PathBuf>) -> Router {
    let network_doc = Arc::new(to_pretty(&network_to_geojson(&catalog.network)));
    let api = Router::new()
        .route("/api/scenarios", get(scenarios))
        .route("/api/network", get(network))
        .route("/api/weights/{scenario}", get(weights))
        .route("/api/route", post(route))
        .with_state(AppState { catalog, network_doc });
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, catalog: Arc<ScenarioCatalog>, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, scenarios = catalog.scenarios.len(), "serving");
    axum::serve(listener, router(catalog, static_dir)).await
}
