use std::time::Duration;

use chrono::{DateTime, Utc};
use rwroute_core::ingest::live::{assemble_live_bundle, EndpointConfig, LivePayloads};
use rwroute_core::ingest::{Bundle, StationKind};
use serde_json::Value;

use crate::ClientError;

async fn fetch_json(http: &reqwest::Client, url: &str) -> Result<Value, ClientError> {
    tracing::debug!(url, "fetching");
    let resp = http.get(url).send().await?;
    let status = resp.status();
    if !status.is_success() {
        return Err(ClientError::Transport(format!("{url}: HTTP {status}")));
    }
    Ok(resp.json().await?)
}

fn updated_at(data: &Value) -> Option<DateTime<Utc>> {
    data.get("dataUpdatedTime")?.as_str()?.parse().ok()
}

/// Fetches metadata and current data for every configured station, plus
/// the active traffic messages, and assembles a bundle. Any failed request
/// aborts the capture.
///
/// The bundle timestamp is `recorded_at` when given, otherwise the latest
/// `dataUpdatedTime` seen, so a capture of fixed payloads is reproducible.
pub async fn fetch_live_snapshot(
    config: &EndpointConfig,
    recorded_at: Option<DateTime<Utc>>,
) -> Result<Bundle, ClientError> {
    if config.is_empty() {
        return Err(ClientError::Payload("no stations configured; nothing to record".into()));
    }
    let http = reqwest::Client::builder()
        .timeout(Duration::from_secs(config.timeout_secs))
        .user_agent(concat!("rwroute/", env!("CARGO_PKG_VERSION")))
        .build()
        .map_err(|e| ClientError::Transport(e.to_string()))?;
    let base = config.base_url.trim_end_matches('/');
    let mut p = LivePayloads::default();
    for (kind, ids) in [(StationKind::Weather, &config.weather_stations), (StationKind::Traffic, &config.traffic_stations)] {
        for &id in ids {
            let meta = fetch_json(&http, &format!("{base}{}", EndpointConfig::station_meta_path(kind, id))).await?;
            let data = fetch_json(&http, &format!("{base}{}", EndpointConfig::station_data_path(kind, id))).await?;
            let (metas, datas) = match kind {
                StationKind::Weather => (&mut p.weather_meta, &mut p.weather_data),
                StationKind::Traffic => (&mut p.traffic_meta, &mut p.traffic_data),
            };
            metas.insert(id, meta);
            datas.insert(id, data);
        }
    }
    if config.include_events {
        p.messages = Some(fetch_json(&http, &format!("{base}{}", EndpointConfig::MESSAGES_PATH)).await?);
    }
    let at = recorded_at
        .or_else(|| p.weather_data.values().chain(p.traffic_data.values()).filter_map(updated_at).max())
        .unwrap_or_else(Utc::now);
    Ok(assemble_live_bundle(config, p, at).map_err(rwroute_core::Error::from)?)
}
