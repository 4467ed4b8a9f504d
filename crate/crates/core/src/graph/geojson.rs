//! GeoJSON network input and output. Coordinates are `[lon, lat]` on disk.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use super::{build_graph, split_at_nodes, InputPolyline, Node, NodeId, RoadNetwork, RoadSegment};
use crate::error::{Error, IngestError};
use crate::geo::{point_polyline_distance, Coord};
use crate::ingest::TrafficEvent;

/// Event geometries are matched to segments within this distance.
pub const EVENT_MATCH_TOLERANCE_M: f64 = 20.0;

fn read_json(path: &Path) -> Result<Value, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IngestError::json(path, e))
}

fn invalid(path: &Path, message: String) -> IngestError {
    IngestError::Invalid { path: path.to_path_buf(), message }
}

fn features<'a>(path: &Path, doc: &'a Value) -> Result<&'a [Value], IngestError> {
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(invalid(path, "expected a FeatureCollection".into()));
    }
    doc.get("features")
        .and_then(Value::as_array)
        .map(Vec::as_slice)
        .ok_or_else(|| invalid(path, "FeatureCollection without `features` array".into()))
}

fn position(path: &Path, v: &Value, at: &str) -> Result<Coord, IngestError> {
    let pair = v.as_array().filter(|a| a.len() >= 2);
    let (Some(lon), Some(lat)) = (
        pair.and_then(|a| a[0].as_f64()),
        pair.and_then(|a| a[1].as_f64()),
    ) else {
        return Err(invalid(path, format!("{at}: position must be [lon, lat]")));
    };
    Coord::checked(lat, lon).map_err(|e| invalid(path, format!("{at}: {e}")))
}

fn id_string(v: Option<&Value>) -> Option<String> {
    match v? {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Road polylines from LineString features with properties `id` and
/// optional `road_number`.
pub fn parse_network_geojson(path: &Path, doc: &Value) -> Result<Vec<InputPolyline>, IngestError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, f) in features(path, doc)?.iter().enumerate() {
        let at = format!("feature {i}");
        let props = f.get("properties");
        let id = id_string(props.and_then(|p| p.get("id")))
            .ok_or_else(|| invalid(path, format!("{at}: missing string or integer `id`")))?;
        if !seen.insert(id.clone()) {
            return Err(invalid(path, format!("{at}: duplicate id `{id}`")));
        }
        let road_number = match props.and_then(|p| p.get("road_number")) {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .and_then(|n| u32::try_from(n).ok())
                    .ok_or_else(|| invalid(path, format!("{at}: `road_number` must be a non-negative integer")))?,
            ),
        };
        let geom = f.get("geometry");
        if geom.and_then(|g| g.get("type")).and_then(Value::as_str) != Some("LineString") {
            return Err(invalid(path, format!("{at}: geometry must be a LineString")));
        }
        let coords = geom
            .and_then(|g| g.get("coordinates"))
            .and_then(Value::as_array)
            .ok_or_else(|| invalid(path, format!("{at}: missing coordinates")))?;
        let geometry = coords.iter().map(|c| position(path, c, &at)).collect::<Result<Vec<_>, _>>()?;
        out.push(InputPolyline { id, road_number, geometry });
    }
    Ok(out)
}

/// Intersection nodes from Point features with an integer `id` property.
pub fn parse_nodes_geojson(path: &Path, doc: &Value) -> Result<Vec<Node>, IngestError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, f) in features(path, doc)?.iter().enumerate() {
        let at = format!("feature {i}");
        let id = f
            .get("properties")
            .and_then(|p| p.get("id"))
            .and_then(Value::as_u64)
            .ok_or_else(|| invalid(path, format!("{at}: missing non-negative integer `id`")))?;
        if !seen.insert(id) {
            return Err(invalid(path, format!("{at}: duplicate node id {id}")));
        }
        let geom = f.get("geometry");
        if geom.and_then(|g| g.get("type")).and_then(Value::as_str) != Some("Point") {
            return Err(invalid(path, format!("{at}: geometry must be a Point")));
        }
        let coords = position(path, geom.and_then(|g| g.get("coordinates")).unwrap_or(&Value::Null), &at)?;
        out.push(Node { id: NodeId(id), coords });
    }
    Ok(out)
}

/// Reads, splits and builds the network from its GeoJSON files.
pub fn load_network(network: &Path, nodes: Option<&Path>, snap_tolerance_m: f64) -> Result<RoadNetwork, Error> {
    let lines = parse_network_geojson(network, &read_json(network)?)?;
    let nodes = match nodes {
        Some(p) => parse_nodes_geojson(p, &read_json(p)?)?,
        None => Vec::new(),
    };
    let segments = split_at_nodes(&lines, &nodes, snap_tolerance_m)?;
    Ok(build_graph(segments)?)
}

fn line_coords(geometry: &[Coord]) -> Value {
    Value::Array(geometry.iter().map(|c| json!(c.to_lon_lat())).collect())
}

pub(crate) fn segment_feature(seg: &RoadSegment, mut properties: serde_json::Map<String, Value>) -> Value {
    properties.insert("id".into(), json!(seg.id));
    properties.insert("road_number".into(), json!(seg.road_number));
    properties.insert("from_node".into(), json!(seg.from_node));
    properties.insert("to_node".into(), json!(seg.to_node));
    properties.insert("length_m".into(), json!(seg.length_m));
    json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": line_coords(&seg.geometry) },
        "properties": properties,
    })
}

/// The built network as a FeatureCollection: one LineString per segment
/// followed by one Point per node.
pub fn network_to_geojson(network: &RoadNetwork) -> Value {
    let mut features: Vec<Value> =
        network.segments().iter().map(|s| segment_feature(s, serde_json::Map::new())).collect();
    features.extend(network.nodes().iter().map(|n| {
        json!({
            "type": "Feature",
            "geometry": { "type": "Point", "coordinates": n.coords.to_lon_lat() },
            "properties": { "id": n.id, "degree": network.degree(n.id) },
        })
    }));
    json!({ "type": "FeatureCollection", "features": features })
}

/// Points along a segment that stay clear of its endpoints, so that an
/// event line ending at an intersection does not claim every road there.
fn interior_samples(geometry: &[Coord]) -> Vec<Coord> {
    let mut out: Vec<Coord> = geometry[1..geometry.len().saturating_sub(1)].to_vec();
    for w in geometry.windows(2) {
        for t in [0.25, 0.5, 0.75] {
            out.push(Coord::new(w[0].lat + t * (w[1].lat - w[0].lat), w[0].lon + t * (w[1].lon - w[0].lon)));
        }
    }
    out
}

/// Segment ids an event applies to: its explicit ids plus any segment its
/// geometry touches. A single point claims segments passing within
/// `tolerance_m`; a line claims segments with an interior sample within
/// `tolerance_m` of it.
pub fn event_segments(event: &TrafficEvent, network: &RoadNetwork, tolerance_m: f64) -> BTreeSet<String> {
    let mut out: BTreeSet<String> =
        event.affected.segments.iter().filter(|s| network.segment(s).is_some()).cloned().collect();
    let geom: Vec<Coord> = event.affected.geometry.iter().map(|p| Coord::from_lon_lat(*p)).collect();
    match geom.len() {
        0 => {}
        1 => {
            for s in network.segments() {
                if point_polyline_distance(geom[0], &s.geometry) <= tolerance_m {
                    out.insert(s.id.clone());
                }
            }
        }
        _ => {
            for s in network.segments() {
                if interior_samples(&s.geometry).iter().any(|p| point_polyline_distance(*p, &geom) <= tolerance_m) {
                    out.insert(s.id.clone());
                }
            }
        }
    }
    out
}

/// Events with their geometry resolved to explicit segment ids.
pub fn resolve_event_segments(events: &[TrafficEvent], network: &RoadNetwork, tolerance_m: f64) -> Vec<TrafficEvent> {
    events
        .iter()
        .map(|e| {
            let mut e = e.clone();
            e.affected.segments = event_segments(&e, network, tolerance_m).into_iter().collect();
            e
        })
        .collect()
}
