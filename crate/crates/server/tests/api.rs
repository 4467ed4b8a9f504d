use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use rwroute_core::api::parse_route_request;
use rwroute_core::graph::geojson::load_network;
use rwroute_core::graph::DEFAULT_SNAP_TOLERANCE_M;
use rwroute_core::pipeline::{to_pretty, ScenarioCatalog};
use rwroute_core::weights::ScaleRegistry;
use serde_json::{json, Value};
use tower::ServiceExt;

fn catalog() -> Arc<ScenarioCatalog> {
    let f = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let net = load_network(&f.join("network.geojson"), Some(&f.join("nodes.geojson")), DEFAULT_SNAP_TOLERANCE_M).unwrap();
    Arc::new(ScenarioCatalog::load_dir(net, &f.join("scenarios"), &ScaleRegistry::default()).unwrap())
}

async fn call(cat: &Arc<ScenarioCatalog>, req: Request<Body>) -> (StatusCode, String) {
    let resp = rwroute_server::router(cat.clone(), None).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(body: &str) -> Request<Body> {
    Request::post("/api/route").header("content-type", "application/json").body(Body::from(body.to_owned())).unwrap()
}

#[tokio::test]
async fn lists_three_scenarios() {
    let cat = catalog();
    let (status, body) = call(&cat, get("/api/scenarios")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["base", "calm", "golden"]);
}

#[tokio::test]
async fn network_and_weights() {
    let cat = catalog();
    let (status, body) = call(&cat, get("/api/network")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    assert_eq!(v["features"].as_array().unwrap().len(), 7 + 5);

    let (status, body) = call(&cat, get("/api/weights/base?length_mode=normalized")).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_str(&body).unwrap();
    let max_len = v["features"].as_array().unwrap().iter().map(|f| f["properties"]["length"].as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(max_len, 1.0);

    let (status, body) = call(&cat, get("/api/weights/base?length_mode=miles")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body.contains("length_mode"));
}

#[tokio::test]
async fn unknown_scenario_is_404() {
    let cat = catalog();
    let (status, _) = call(&cat, get("/api/weights/thunder")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, body) = call(
        &cat,
        post(r#"{"scenario": "thunder", "from": "65.0,25.0", "to": "65.0,25.21", "profile": "tapio"}"#),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND, "{body}");
}

#[tokio::test]
async fn five_element_vector_is_400_with_field() {
    let cat = catalog();
    let body = json!({"scenario": "base", "from": "65.0,25.0", "to": "65.0,25.21",
                      "profile": {"vector": [0.2, 0.2, 0.2, 0.2, 0.2]}});
    let (status, resp) = call(&cat, post(&body.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v: Value = serde_json::from_str(&resp).unwrap();
    assert_eq!(v["fields"][0]["field"], "profile.vector");

    let (status, resp) = call(&cat, post("{not json")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(resp.contains("not valid JSON"));
}

#[tokio::test]
async fn route_matches_the_shared_core() {
    let cat = catalog();
    let body = json!({"scenario": "base", "from": "65.0,25.0", "to": "65.0,25.21", "profile": "tapio"});
    let (status, resp) = call(&cat, post(&body.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let direct = cat.plan(&parse_route_request(&body).unwrap()).unwrap();
    assert_eq!(resp, to_pretty(&direct));
    // Deterministic across calls.
    let (_, again) = call(&cat, post(&body.to_string())).await;
    assert_eq!(resp, again);
}
