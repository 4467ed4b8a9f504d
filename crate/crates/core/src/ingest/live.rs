//! Decoding of the public road-traffic JSON API payloads into bundle
//! records. Transport lives in the client crate; everything here is pure so
//! recorded payloads can be replayed in tests.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::Value;

use super::bundle::{Bundle, ScenarioHeader};
use super::{EventKind, EventLocation, SensorReading, StationId, StationKind, StationMeta, StationSnapshot, TrafficEvent};
use crate::error::IngestError;
use crate::geo::Coord;
use crate::weights::RoadWorkSeverity;

/// Where and what to fetch.
#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
pub struct EndpointConfig {
    pub base_url: String,
    pub scenario: String,
    #[serde(default)]
    pub weather_stations: Vec<u64>,
    #[serde(default)]
    pub traffic_stations: Vec<u64>,
    #[serde(default = "yes")]
    pub include_events: bool,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn yes() -> bool {
    true
}

fn default_timeout() -> u64 {
    20
}

impl EndpointConfig {
    pub fn station_data_path(kind: StationKind, id: u64) -> String {
        match kind {
            StationKind::Weather => format!("/api/weather/v1/stations/{id}/data"),
            StationKind::Traffic => format!("/api/tms/v1/stations/{id}/data"),
        }
    }

    pub fn station_meta_path(kind: StationKind, id: u64) -> String {
        match kind {
            StationKind::Weather => format!("/api/weather/v1/stations/{id}"),
            StationKind::Traffic => format!("/api/tms/v1/stations/{id}"),
        }
    }

    pub const MESSAGES_PATH: &'static str = "/api/traffic-message/v1/messages?inactiveHours=0&includeAreaGeometry=false";

    pub fn is_empty(&self) -> bool {
        self.weather_stations.is_empty() && self.traffic_stations.is_empty()
    }
}

fn payload<T: serde::de::DeserializeOwned>(what: &str, v: Value) -> Result<T, IngestError> {
    serde_json::from_value(v).map_err(|e| IngestError::Payload(format!("{what}: {e}")))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SensorValue {
    id: u32,
    name: String,
    value: f64,
    #[serde(default)]
    unit: Option<String>,
    #[serde(default)]
    measured_time: Option<DateTime<Utc>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StationData {
    id: u64,
    #[serde(default)]
    data_updated_time: Option<DateTime<Utc>>,
    #[serde(default)]
    sensor_values: Vec<SensorValue>,
}

/// Decodes a `/stations/{id}/data` payload. Stations without sensors yield
/// an empty reading list.
pub fn decode_station_data(
    kind: StationKind,
    body: Value,
    meta: &StationMeta,
    fallback_time: DateTime<Utc>,
) -> Result<StationSnapshot, IngestError> {
    let data: StationData = payload("station data", body)?;
    if data.id != meta.station_id.0 {
        return Err(IngestError::Payload(format!(
            "station data for {} returned id {}",
            meta.station_id, data.id
        )));
    }
    let at = data.data_updated_time.unwrap_or(fallback_time);
    let mut readings: Vec<SensorReading> = data
        .sensor_values
        .into_iter()
        .filter(|s| s.id >= 1 && s.value.is_finite())
        .map(|s| SensorReading {
            sensor_id: s.id,
            name: s.name,
            value: s.value,
            unit: s.unit.filter(|u| !u.is_empty() && u != "***"),
            measured_at: s.measured_time.unwrap_or(at),
        })
        .collect();
    readings.sort_by(|a, b| a.sensor_id.cmp(&b.sensor_id).then_with(|| a.name.cmp(&b.name)));
    Ok(StationSnapshot { station_id: meta.station_id, kind, coords: meta.coords, readings, recorded_at: fallback_time })
}

#[derive(Debug, Deserialize)]
struct PointGeometry {
    coordinates: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RoadAddress {
    #[serde(default)]
    road_number: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StationProperties {
    id: u64,
    #[serde(default)]
    road_address: Option<RoadAddress>,
    #[serde(default)]
    free_flow_speed1: Option<f64>,
    #[serde(default)]
    free_flow_speed2: Option<f64>,
    #[serde(default)]
    direction1_municipality: Option<String>,
    #[serde(default)]
    direction2_municipality: Option<String>,
}

#[derive(Debug, Deserialize)]
struct StationFeature {
    geometry: PointGeometry,
    properties: StationProperties,
}

/// Decodes a station metadata GeoJSON feature.
pub fn decode_station_meta(kind: StationKind, body: Value) -> Result<StationMeta, IngestError> {
    let f: StationFeature = payload("station metadata", body)?;
    let [lon, lat] = match f.geometry.coordinates.as_slice() {
        [lon, lat, ..] => [*lon, *lat],
        _ => return Err(IngestError::Payload("station metadata: point needs two coordinates".into())),
    };
    let coords = Coord::checked(lat, lon).map_err(|e| IngestError::Payload(e.to_string()))?;
    let positive = |v: Option<f64>| v.filter(|x| *x > 0.0 && x.is_finite());
    Ok(StationMeta {
        station_id: StationId(f.properties.id),
        kind,
        coords,
        road_number: f.properties.road_address.and_then(|r| r.road_number),
        ffs_dir1: positive(f.properties.free_flow_speed1),
        ffs_dir2: positive(f.properties.free_flow_speed2),
        capacity_dir1: None,
        capacity_dir2: None,
        direction1_municipality: f.properties.direction1_municipality,
        direction2_municipality: f.properties.direction2_municipality,
        direction: None,
    })
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RoadWorkPhase {
    #[serde(default)]
    severity: Option<String>,
}

#[derive(Debug, Deserialize)]
struct AnnouncementFeature {
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Announcement {
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    features: Vec<AnnouncementFeature>,
    #[serde(default)]
    road_work_phases: Vec<RoadWorkPhase>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MessageProperties {
    situation_id: String,
    situation_type: String,
    #[serde(default)]
    traffic_announcement_type: Option<String>,
    #[serde(default)]
    version: Option<u64>,
    release_time: DateTime<Utc>,
    #[serde(default)]
    announcements: Vec<Announcement>,
}

#[derive(Debug, Deserialize)]
struct MessageFeature {
    #[serde(default)]
    geometry: Option<Value>,
    properties: MessageProperties,
}

#[derive(Debug, Deserialize)]
struct MessageCollection {
    features: Vec<MessageFeature>,
}

fn geometry_parts(g: &Value) -> Result<Vec<Vec<[f64; 2]>>, IngestError> {
    let kind = g.get("type").and_then(Value::as_str).unwrap_or_default();
    let coords = g.get("coordinates").cloned().unwrap_or(Value::Null);
    let pt = |v: &Vec<f64>| -> Result<[f64; 2], IngestError> {
        match v.as_slice() {
            [lon, lat, ..] => Ok([*lon, *lat]),
            _ => Err(IngestError::Payload("coordinate needs two numbers".into())),
        }
    };
    match kind {
        "Point" => {
            let p: Vec<f64> = payload("point", coords)?;
            Ok(vec![vec![pt(&p)?]])
        }
        "LineString" => {
            let l: Vec<Vec<f64>> = payload("line", coords)?;
            Ok(vec![l.iter().map(pt).collect::<Result<_, _>>()?])
        }
        "MultiLineString" => {
            let ls: Vec<Vec<Vec<f64>>> = payload("multiline", coords)?;
            ls.iter().map(|l| l.iter().map(pt).collect()).collect()
        }
        other => Err(IngestError::Payload(format!("unsupported geometry type `{other}`"))),
    }
}

fn severity(s: &str) -> Option<RoadWorkSeverity> {
    match s.to_ascii_uppercase().as_str() {
        "LOW" => Some(RoadWorkSeverity::Low),
        "HIGH" => Some(RoadWorkSeverity::High),
        "HIGHEST" => Some(RoadWorkSeverity::Highest),
        _ => None,
    }
}

fn mentions_accident(p: &MessageProperties) -> bool {
    let hit = |s: &str| {
        let s = s.to_lowercase();
        s.contains("onnettomuus") || s.contains("accident")
    };
    p.announcements.iter().any(|a| {
        a.title.as_deref().is_some_and(hit) || a.features.iter().filter_map(|f| f.name.as_deref()).any(hit)
    })
}

/// Decodes a traffic message FeatureCollection. Messages of no interest
/// (other announcement types, road works without a severity) are skipped.
/// Multi-part geometries become one event per part.
pub fn decode_traffic_messages(body: Value) -> Result<Vec<TrafficEvent>, IngestError> {
    let fc: MessageCollection = payload("traffic messages", body)?;
    let mut out = Vec::new();
    for f in fc.features {
        let p = &f.properties;
        let (kind, sev) = match p.situation_type.as_str() {
            "ROAD_WORK" => {
                let sev = p
                    .announcements
                    .iter()
                    .flat_map(|a| &a.road_work_phases)
                    .filter_map(|ph| ph.severity.as_deref().and_then(severity))
                    .max();
                match sev {
                    Some(s) => (EventKind::RoadWork, Some(s)),
                    None => continue,
                }
            }
            "TRAFFIC_ANNOUNCEMENT" => match p.traffic_announcement_type.as_deref() {
                Some("PRELIMINARY_ACCIDENT_REPORT") => (EventKind::AccidentPreliminary, None),
                Some("ACCIDENT_REPORT") => (EventKind::AccidentReport, None),
                Some("ENDED") => (EventKind::Ended, None),
                Some("GENERAL") if mentions_accident(p) => (EventKind::GeneralAccident, None),
                _ => continue,
            },
            _ => continue,
        };
        let parts = match &f.geometry {
            Some(g) if !g.is_null() => geometry_parts(g)?,
            _ => vec![vec![]],
        };
        let base_id = format!("{}:{}", p.situation_id, p.version.unwrap_or(1));
        let many = parts.len() > 1;
        for (k, part) in parts.into_iter().enumerate() {
            out.push(TrafficEvent {
                event_id: if many { format!("{base_id}#{k}") } else { base_id.clone() },
                situation_id: Some(p.situation_id.clone()),
                kind,
                severity: sev,
                affected: EventLocation { segments: vec![], geometry: part },
                published_at: p.release_time,
                superseded_by: None,
            });
        }
    }
    out.sort_by(|a, b| a.event_id.cmp(&b.event_id));
    Ok(out)
}

/// Raw payloads gathered from the API, keyed by station.
#[derive(Debug, Default, Clone)]
pub struct LivePayloads {
    pub weather_meta: BTreeMap<u64, Value>,
    pub weather_data: BTreeMap<u64, Value>,
    pub traffic_meta: BTreeMap<u64, Value>,
    pub traffic_data: BTreeMap<u64, Value>,
    pub messages: Option<Value>,
}

/// Builds a bundle from fetched payloads. Every configured station must be
/// present; a partial capture is refused.
pub fn assemble_live_bundle(
    config: &EndpointConfig,
    payloads: LivePayloads,
    recorded_at: DateTime<Utc>,
) -> Result<Bundle, IngestError> {
    if config.is_empty() {
        return Err(IngestError::Payload("no stations configured; nothing to record".into()));
    }
    let mut metas = Vec::new();
    let mut weather = Vec::new();
    let mut traffic = Vec::new();
    for (kind, ids, meta_map, data_map) in [
        (StationKind::Weather, &config.weather_stations, &payloads.weather_meta, &payloads.weather_data),
        (StationKind::Traffic, &config.traffic_stations, &payloads.traffic_meta, &payloads.traffic_data),
    ] {
        for id in ids {
            let missing = || IngestError::Payload(format!("no payload for {} station {id}", kind.as_str()));
            let meta = decode_station_meta(kind, meta_map.get(id).cloned().ok_or_else(missing)?)?;
            let snap = decode_station_data(kind, data_map.get(id).cloned().ok_or_else(missing)?, &meta, recorded_at)?;
            metas.push(meta);
            match kind {
                StationKind::Weather => weather.push(snap),
                StationKind::Traffic => traffic.push(snap),
            }
        }
    }
    let events = match payloads.messages {
        Some(m) => decode_traffic_messages(m)?,
        None => Vec::new(),
    };
    let mut b = Bundle {
        header: ScenarioHeader { name: config.scenario.clone(), recorded_at, description: None },
        weather,
        traffic,
        metas,
        events,
        sensor_mapping: None,
        ffs_overrides: None,
        code_tables: None,
        station_assignment: None,
    };
    b.normalize();
    Ok(b)
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    fn meta_json(id: u64) -> Value {
        json!({
            "type": "Feature",
            "id": id,
            "geometry": {"type": "Point", "coordinates": [25.47, 65.01, 0.0]},
            "properties": {
                "id": id,
                "name": "vt4_Oulu",
                "roadAddress": {"roadNumber": 4, "roadSection": 401},
                "freeFlowSpeed1": 80.0,
                "freeFlowSpeed2": 78.0,
                "direction1Municipality": "Oulu"
            }
        })
    }

    #[test]
    fn station_meta_and_data() {
        let meta = decode_station_meta(StationKind::Traffic, meta_json(23)).unwrap();
        assert_eq!(meta.road_number, Some(4));
        assert_eq!(meta.ffs_dir2, Some(78.0));
        assert!((meta.coords.lat - 65.01).abs() < 1e-12);

        let t = "2024-05-10T12:00:00Z".parse().unwrap();
        let data = json!({"id": 23, "dataUpdatedTime": "2024-05-10T11:59:00Z", "sensorValues": [
            {"id": 5122, "stationId": 23, "name": "KESKINOPEUS_5MIN_LIUKUVA_SUUNTA1", "value": 71.0, "unit": "km/h"}
        ]});
        let snap = decode_station_data(StationKind::Traffic, data, &meta, t).unwrap();
        assert_eq!(snap.readings.len(), 1);
        assert_eq!(snap.readings[0].measured_at, "2024-05-10T11:59:00Z".parse::<DateTime<Utc>>().unwrap());

        let empty = decode_station_data(StationKind::Traffic, json!({"id": 23}), &meta, t).unwrap();
        assert!(empty.readings.is_empty());
    }

    #[test]
    fn mismatched_or_malformed_payloads() {
        let meta = decode_station_meta(StationKind::Weather, meta_json(1)).unwrap();
        let t = "2024-05-10T12:00:00Z".parse().unwrap();
        assert!(decode_station_data(StationKind::Weather, json!({"id": 2}), &meta, t).is_err());
        assert!(decode_station_data(StationKind::Weather, json!([1, 2]), &meta, t).is_err());
        assert!(decode_station_meta(StationKind::Weather, json!({"geometry": {}})).is_err());
    }

    #[test]
    fn traffic_messages() {
        let body = json!({"type": "FeatureCollection", "features": [
            {"type": "Feature",
             "geometry": {"type": "LineString", "coordinates": [[25.0, 65.0], [25.1, 65.0]]},
             "properties": {"situationId": "GUID1", "situationType": "ROAD_WORK", "version": 3,
                            "releaseTime": "2024-05-10T08:00:00Z",
                            "announcements": [{"roadWorkPhases": [{"severity": "LOW"}, {"severity": "HIGHEST"}]}]}},
            {"type": "Feature", "geometry": {"type": "Point", "coordinates": [25.2, 65.1]},
             "properties": {"situationId": "GUID2", "situationType": "TRAFFIC_ANNOUNCEMENT",
                            "trafficAnnouncementType": "PRELIMINARY_ACCIDENT_REPORT",
                            "releaseTime": "2024-05-10T11:50:00Z"}},
            {"type": "Feature", "geometry": null,
             "properties": {"situationId": "GUID3", "situationType": "TRAFFIC_ANNOUNCEMENT",
                            "trafficAnnouncementType": "GENERAL",
                            "releaseTime": "2024-05-10T11:50:00Z",
                            "announcements": [{"title": "Tie 4, Oulu. Liikennetiedote.", "features": [{"name": "Eläin tiellä"}]}]}},
            {"type": "Feature", "geometry": {"type": "MultiLineString", "coordinates": [[[25.0, 65.0], [25.1, 65.0]], [[25.3, 65.2], [25.4, 65.2]]]},
             "properties": {"situationId": "GUID4", "situationType": "TRAFFIC_ANNOUNCEMENT",
                            "trafficAnnouncementType": "GENERAL",
                            "releaseTime": "2024-05-10T11:00:00Z",
                            "announcements": [{"features": [{"name": "Liikenneonnettomuus"}]}]}}
        ]});
        let ev = decode_traffic_messages(body).unwrap();
        let kinds: Vec<_> = ev.iter().map(|e| (e.event_id.as_str(), e.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                ("GUID1:3", EventKind::RoadWork),
                ("GUID2:1", EventKind::AccidentPreliminary),
                ("GUID4:1#0", EventKind::GeneralAccident),
                ("GUID4:1#1", EventKind::GeneralAccident),
            ]
        );
        assert_eq!(ev[0].severity, Some(RoadWorkSeverity::Highest));
        assert_eq!(ev[0].affected.geometry.len(), 2);
        assert!(decode_traffic_messages(json!({"features": [{"properties": {}}]})).is_err());
    }

    #[test]
    fn empty_station_list_is_refused() {
        let cfg = EndpointConfig {
            base_url: "http://localhost".into(),
            scenario: "x".into(),
            weather_stations: vec![],
            traffic_stations: vec![],
            include_events: false,
            timeout_secs: 1,
        };
        let t = "2024-05-10T12:00:00Z".parse().unwrap();
        assert!(assemble_live_bundle(&cfg, LivePayloads::default(), t).is_err());
    }
}
