//! Bundle + network to station weights, segment weights and routes. Shared
//! by the command line and the HTTP service.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, IngestError};
use crate::fusion::{
    assemble_segment_vector, compute_weather_factors_with, traffic_percentages, weights_to_geojson, GroupWeights,
    LengthMode, SegmentEvents, SegmentWeightVector, SegmentWeights, StationWeights, WeatherFactors,
};
use crate::geo::Coord;
use crate::graph::geojson::{resolve_event_segments, EVENT_MATCH_TOLERANCE_M};
use crate::graph::{assign_stations, RoadNetwork, StationAssignment};
use crate::ingest::{
    accident_active, canonicalize, parse_scenario_bundle, roadwork_severity_by_segment, Bundle, BundleReport,
    StationId, StationKind, StationSnapshot,
};
use crate::router::{shortest_route, PreferenceVector, Route};
use crate::weights::{ScaleKey, ScaleRegistry};

/// Versioned scale registry file, overlaid on the compiled-in scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleConfig {
    pub version: u32,
    pub scales: ScaleRegistry,
}

pub fn load_scale_config(path: &Path) -> Result<ScaleRegistry, Error> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let cfg: ScaleConfig = serde_json::from_str(&text).map_err(|e| IngestError::json(path, e))?;
    let mut reg = ScaleRegistry::default();
    reg.merge(&cfg.scales)?;
    Ok(reg)
}

/// Everything computed for one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationReport {
    pub station_id: StationId,
    pub kind: StationKind,
    pub coords: Coord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub road_number: Option<u32>,
    pub readings: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<WeatherFactors>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<GroupWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ffs_percent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupancy_percent: Option<f64>,
    pub weights: StationWeights,
}

fn station_report(bundle: &Bundle, snap: &StationSnapshot, scales: &ScaleRegistry) -> StationReport {
    let mapping = bundle.sensor_mapping();
    let codes = bundle.code_tables();
    let original = bundle.meta(snap.kind, snap.station_id);
    let corrected = original.map(|m| match &bundle.ffs_overrides {
        Some(o) => crate::ingest::apply_ffs_correction(m, o),
        None => m.clone(),
    });
    let direction = original.map(|m| m.monitored_direction());
    let attrs = canonicalize(&snap.readings, &mapping, &codes, direction);

    let mut r = StationReport {
        station_id: snap.station_id,
        kind: snap.kind,
        coords: snap.coords,
        road_number: original.and_then(|m| m.road_number),
        readings: snap.readings.len(),
        factors: None,
        groups: None,
        ffs_percent: None,
        occupancy_percent: None,
        weights: StationWeights::default(),
    };
    match snap.kind {
        StationKind::Weather => {
            let f = compute_weather_factors_with(&attrs, scales);
            let g = GroupWeights::from_factors(&f);
            r.weights = StationWeights::weather(&g);
            r.factors = Some(f);
            r.groups = Some(g);
        }
        StationKind::Traffic => {
            let (ffs, occ) = traffic_percentages(&attrs, original, corrected.as_ref());
            let w = |k: ScaleKey, v: Option<f64>| v.and_then(|v| scales.weight(k, v).ok());
            r.weights = StationWeights::traffic(w(ScaleKey::FfsPercent, ffs), w(ScaleKey::OccupancyPercent, occ));
            r.ffs_percent = ffs;
            r.occupancy_percent = occ;
        }
    }
    r
}

/// Station weights for every snapshot in the bundle, weather first, each
/// kind ordered by station id.
pub fn compute_station_weights(bundle: &Bundle, scales: &ScaleRegistry) -> Vec<StationReport> {
    let mut b = bundle.clone();
    b.normalize();
    b.weather.iter().chain(&b.traffic).map(|s| station_report(&b, s, scales)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Range> {
        values.into_iter().fold(None, |acc, v| match acc {
            None => Some(Range { min: v, max: v }),
            Some(r) => Some(Range { min: r.min.min(v), max: r.max.max(v) }),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionRanges {
    pub length: Range,
    pub traffic: Range,
    pub weather: Range,
    pub events: Range,
}

/// Summary of a weight map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub scenario: String,
    pub recorded_at: DateTime<Utc>,
    pub length_mode: LengthMode,
    pub segments: usize,
    pub data_incomplete: usize,
    /// Absent for an empty network.
    pub ranges: Option<DimensionRanges>,
    /// Max minus min of the segment weather weights.
    pub weather_spread: f64,
    pub stations: Vec<StationReport>,
}

/// Segment weights for a scenario on a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioWeights {
    pub assignment: StationAssignment,
    pub segments: BTreeMap<String, SegmentWeights>,
    pub summary: WeightSummary,
}

impl ScenarioWeights {
    pub fn vectors(&self) -> BTreeMap<String, SegmentWeightVector> {
        self.segments.iter().map(|(k, v)| (k.clone(), v.vector)).collect()
    }
}

pub fn compute_scenario_weights(
    bundle: &Bundle,
    network: &RoadNetwork,
    mode: LengthMode,
    scales: &ScaleRegistry,
) -> Result<ScenarioWeights, Error> {
    let stations = compute_station_weights(bundle, scales);
    let by_kind = |kind: StationKind| -> BTreeMap<StationId, StationWeights> {
        stations.iter().filter(|s| s.kind == kind).map(|s| (s.station_id, s.weights)).collect()
    };
    let (weather, traffic) = (by_kind(StationKind::Weather), by_kind(StationKind::Traffic));

    let assignment = assign_stations(network, &bundle.corrected_metas(), bundle.station_assignment.as_ref())?;
    let events = resolve_event_segments(&bundle.events, network, EVENT_MATCH_TOLERANCE_M);
    let roadwork = roadwork_severity_by_segment(&events);
    let accidents = accident_active(&events, bundle.header.recorded_at);
    let normalizer = network.max_segment_length();

    let mut segments = BTreeMap::new();
    for seg in network.segments() {
        let st = assignment.get(&seg.id).expect("every segment is assigned");
        let ev = SegmentEvents {
            roadwork: roadwork.get(&seg.id).copied().unwrap_or_default(),
            accident: accidents.get(&seg.id).copied().unwrap_or(false),
        };
        let w = assemble_segment_vector(seg, st, &weather, &traffic, ev, mode, normalizer)?;
        segments.insert(seg.id.clone(), w);
    }

    let vs = || segments.values().map(|w| w.vector);
    let ranges = (|| {
        Some(DimensionRanges {
            length: Range::of(vs().map(|v| v.length))?,
            traffic: Range::of(vs().map(|v| v.traffic))?,
            weather: Range::of(vs().map(|v| v.weather))?,
            events: Range::of(vs().map(|v| v.events))?,
        })
    })();
    let summary = WeightSummary {
        scenario: bundle.header.name.clone(),
        recorded_at: bundle.header.recorded_at,
        length_mode: mode,
        segments: segments.len(),
        data_incomplete: segments.values().filter(|w| w.data_incomplete).count(),
        weather_spread: ranges.map_or(0.0, |r| r.weather.max - r.weather.min),
        ranges,
        stations,
    };
    Ok(ScenarioWeights { assignment, segments, summary })
}

/// Weight map FeatureCollection with the summary as a foreign member.
pub fn weights_document(network: &RoadNetwork, weights: &ScenarioWeights) -> Value {
    let mut doc = weights_to_geojson(network, &weights.segments);
    doc["summary"] = serde_json::to_value(&weights.summary).expect("summary serializes");
    doc
}

/// Route as a GeoJSON Feature with a LineString geometry.
pub fn route_document(
    network: &RoadNetwork,
    weights: &ScenarioWeights,
    route: &Route,
    preference: &PreferenceVector,
    scenario: &str,
    mode: LengthMode,
) -> Value {
    let mut coords: Vec<[f64; 2]> = Vec::new();
    let mut at = route.from_node;
    if let Some(n) = network.node(at) {
        coords.push(n.coords.to_lon_lat());
    }
    for id in &route.segments {
        let seg = network.segment(id).expect("route segments exist");
        let pts: Box<dyn Iterator<Item = &Coord>> =
            if seg.from_node == at { Box::new(seg.geometry.iter()) } else { Box::new(seg.geometry.iter().rev()) };
        coords.extend(pts.skip(1).map(|c| c.to_lon_lat()));
        at = seg.other_end(at);
    }
    let incomplete = route.segments.iter().filter(|s| weights.segments.get(*s).is_some_and(|w| w.data_incomplete)).count();
    json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": coords },
        "properties": {
            "scenario": scenario,
            "length_mode": mode,
            "preference": preference,
            "from_node": route.from_node,
            "to_node": route.to_node,
            "from_snap_m": route.from_snap_m,
            "to_snap_m": route.to_snap_m,
            "nodes": route.nodes,
            "segments": route.segments,
            "total_cost": route.total_cost,
            "total_length_m": route.total_length_m,
            "breakdown": route.breakdown,
            "data_incomplete_segments": incomplete,
        },
    })
}

/// Human-readable route summary.
pub fn route_text(route: &Route, preference: &PreferenceVector, incomplete: usize) -> String {
    let b = &route.breakdown;
    let p = preference;
    format!(
        "route {} -> {}: {} segments, {:.3} km, cost {:.6}\n\
         \x20 dimension   sum        weight     cost\n\
         \x20 length   {:>10.4} {:>10.6} {:>10.6}\n\
         \x20 traffic  {:>10.4} {:>10.6} {:>10.6}\n\
         \x20 weather  {:>10.4} {:>10.6} {:>10.6}\n\
         \x20 events   {:>10.4} {:>10.6} {:>10.6}\n\
         \x20 data-incomplete segments: {}\n",
        route.from_node,
        route.to_node,
        route.segments.len(),
        route.total_length_m / 1000.0,
        route.total_cost,
        b.length,
        p.length,
        b.length * p.length,
        b.traffic,
        p.traffic,
        b.traffic * p.traffic,
        b.weather,
        p.weather,
        b.weather * p.weather,
        b.events,
        p.events,
        b.events * p.events,
        incomplete,
    )
}

/// A loaded scenario with weights precomputed in both length modes.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub path: PathBuf,
    pub bundle: Bundle,
    pub report: BundleReport,
    pub raw: ScenarioWeights,
    pub normalized: ScenarioWeights,
}

impl LoadedScenario {
    pub fn load(path: &Path, network: &RoadNetwork, scales: &ScaleRegistry) -> Result<Self, Error> {
        let (bundle, report) = parse_scenario_bundle(path)?;
        Self::from_bundle(path.to_path_buf(), bundle, report, network, scales)
    }

    pub fn from_bundle(
        path: PathBuf,
        bundle: Bundle,
        report: BundleReport,
        network: &RoadNetwork,
        scales: &ScaleRegistry,
    ) -> Result<Self, Error> {
        let raw = compute_scenario_weights(&bundle, network, LengthMode::RawKilometers, scales)?;
        let normalized = compute_scenario_weights(&bundle, network, LengthMode::NormalizedByMax, scales)?;
        Ok(LoadedScenario { path, bundle, report, raw, normalized })
    }

    pub fn weights(&self, mode: LengthMode) -> &ScenarioWeights {
        match mode {
            LengthMode::RawKilometers => &self.raw,
            LengthMode::NormalizedByMax => &self.normalized,
        }
    }

    pub fn summary(&self) -> ScenarioSummary {
        let s = &self.raw.summary;
        ScenarioSummary {
            name: self.bundle.header.name.clone(),
            recorded_at: self.bundle.header.recorded_at,
            description: self.bundle.header.description.clone(),
            weather_stations: self.bundle.weather.len(),
            traffic_stations: self.bundle.traffic.len(),
            events: self.bundle.events.len(),
            unknown_sensors: self.report.unknown_sensors.len(),
            segments: s.segments,
            data_incomplete: s.data_incomplete,
            ranges: s.ranges,
            weather_spread: s.weather_spread,
        }
    }
}

/// Catalog entry as listed by the service. Ranges use raw lengths (km).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub recorded_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub weather_stations: usize,
    pub traffic_stations: usize,
    pub events: usize,
    pub unknown_sensors: usize,
    pub segments: usize,
    pub data_incomplete: usize,
    pub ranges: Option<DimensionRanges>,
    pub weather_spread: f64,
}

/// Scenarios by name, all on one network.
#[derive(Debug, Clone, Default)]
pub struct ScenarioCatalog {
    pub network: RoadNetwork,
    pub scenarios: BTreeMap<String, LoadedScenario>,
}

impl ScenarioCatalog {
    pub fn new(network: RoadNetwork) -> Self {
        ScenarioCatalog { network, scenarios: BTreeMap::new() }
    }

    /// Adds a scenario under its bundle name, which must be unused.
    pub fn insert(&mut self, scenario: LoadedScenario) -> Result<(), Error> {
        let name = scenario.bundle.header.name.clone();
        if self.scenarios.contains_key(&name) {
            return Err(Error::InvalidRequest(format!("duplicate scenario name `{name}`")));
        }
        self.scenarios.insert(name, scenario);
        Ok(())
    }

    /// Loads every bundle directory directly under `dir`, in name order.
    pub fn load_dir(network: RoadNetwork, dir: &Path, scales: &ScaleRegistry) -> Result<Self, Error> {
        let mut cat = ScenarioCatalog::new(network);
        let entries = fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(crate::ingest::SCENARIO_FILE).is_file())
            .collect();
        paths.sort();
        for p in paths {
            let s = LoadedScenario::load(&p, &cat.network, scales)?;
            cat.insert(s)?;
        }
        Ok(cat)
    }

    pub fn get(&self, name: &str) -> Result<&LoadedScenario, Error> {
        self.scenarios.get(name).ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    pub fn summaries(&self) -> Vec<ScenarioSummary> {
        self.scenarios.values().map(LoadedScenario::summary).collect()
    }

    /// Plans a validated request and renders the route document.
    pub fn plan(&self, req: &crate::api::RouteRequest) -> Result<Value, Error> {
        let sc = self.get(&req.scenario)?;
        let p = req.profile.preference()?;
        plan_document(&self.network, sc.weights(req.length_mode), &p, req.from, req.to, &req.scenario, req.length_mode)
    }
}

pub fn plan_document(
    network: &RoadNetwork,
    weights: &ScenarioWeights,
    preference: &PreferenceVector,
    from: Coord,
    to: Coord,
    scenario: &str,
    mode: LengthMode,
) -> Result<Value, Error> {
    let route = shortest_route(network, &weights.vectors(), preference, from, to)?;
    Ok(route_document(network, weights, &route, preference, scenario, mode))
}

/// Serialized form used for every emitted document: pretty JSON plus a
/// trailing newline.
pub fn to_pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}
