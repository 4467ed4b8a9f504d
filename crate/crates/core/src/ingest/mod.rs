//! Station snapshots, metadata and traffic events: parsing, canonical
//! attribute extraction and event rules.

mod attributes;
mod bundle;
mod events;
pub mod live;
pub mod replay;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::geo::Coord;
use crate::weights::RoadWorkSeverity;

pub use attributes::{
    canonicalize, freezing_point_delta, resolve_point_difference, resolve_precipitation, AttributeId,
    CanonicalAttributes, CodeTables, CoarseObservation, MappingEntry, Precipitation, PointContext,
    SensorMapping,
};
pub use bundle::{
    apply_ffs_correction, parse_scenario_bundle, write_scenario_bundle, Bundle, BundleReport, FfsOverrides,
    ScenarioHeader, UnknownSensor, ASSIGNMENT_FILE, CODE_TABLES_FILE, EVENTS_FILE, FFS_OVERRIDES_FILE, META_FILE,
    OVERRIDES_DIR, SCENARIO_FILE, SENSOR_MAPPING_FILE, TRAFFIC_FILE, WEATHER_FILE,
};
pub use events::{accident_active, roadwork_severity_for_segment, roadwork_severity_by_segment, ACCIDENT_PRELIMINARY_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub u64);

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationKind {
    Weather,
    Traffic,
}

impl StationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StationKind::Weather => "weather",
            StationKind::Traffic => "traffic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    pub sensor_id: u32,
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub measured_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationSnapshot {
    pub station_id: StationId,
    pub kind: StationKind,
    pub coords: Coord,
    #[serde(default)]
    pub readings: Vec<SensorReading>,
    pub recorded_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMeta {
    pub station_id: StationId,
    pub kind: StationKind,
    pub coords: Coord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub road_number: Option<u32>,
    /// Free flow speeds per direction, km/h.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ffs_dir1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ffs_dir2: Option<f64>,
    /// Maximum capacity per direction, vehicles/h.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_dir1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_dir2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction1_municipality: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction2_municipality: Option<String>,
    /// Traffic direction (1 or 2) whose measurements are used. Defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<u8>,
}

impl StationMeta {
    pub fn monitored_direction(&self) -> u8 {
        self.direction.unwrap_or(1)
    }

    pub fn ffs(&self) -> Option<f64> {
        match self.monitored_direction() {
            2 => self.ffs_dir2,
            _ => self.ffs_dir1,
        }
    }

    pub fn capacity(&self) -> Option<f64> {
        match self.monitored_direction() {
            2 => self.capacity_dir2,
            _ => self.capacity_dir1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RoadWork,
    AccidentPreliminary,
    AccidentReport,
    GeneralAccident,
    Ended,
}

/// Where an event applies: explicit segment ids, a geometry to be matched
/// against the network, or both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLocation {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<String>,
    /// Point or line, `[lon, lat]` pairs as in GeoJSON.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub geometry: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficEvent {
    pub event_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub situation_id: Option<String>,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<RoadWorkSeverity>,
    #[serde(default)]
    pub affected: EventLocation,
    pub published_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub superseded_by: Option<String>,
}

impl TrafficEvent {
    pub(crate) fn validate(&self) -> Result<(), String> {
        match (self.kind, self.severity) {
            (EventKind::RoadWork, None) => Err(format!("road work event `{}` has no severity", self.event_id)),
            (EventKind::RoadWork, Some(_)) | (_, None) => Ok(()),
            (_, Some(_)) => Err(format!("event `{}` of kind {:?} must not carry a severity", self.event_id, self.kind)),
        }
    }

    pub fn is_accident(&self) -> bool {
        matches!(
            self.kind,
            EventKind::AccidentPreliminary | EventKind::AccidentReport | EventKind::GeneralAccident
        )
    }
}
