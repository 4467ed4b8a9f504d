//! Scenario bundle: a directory holding one frozen capture of station data,
//! station metadata and traffic events.
//!
//! ```text
//! scenario.json            name, recorded_at
//! weather_stations.json    [StationSnapshot]
//! traffic_stations.json    [StationSnapshot]
//! station_meta.json        [StationMeta]
//! events.json              [TrafficEvent]
//! overrides/               optional: sensor_mapping.json, ffs_overrides.json,
//!                          code_tables.json, station_assignment.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{CodeTables, SensorMapping, StationId, StationKind, StationMeta, StationSnapshot, TrafficEvent};
use crate::error::IngestError;
use crate::graph::AssignmentOverrides;

pub const SCENARIO_FILE: &str = "scenario.json";
pub const WEATHER_FILE: &str = "weather_stations.json";
pub const TRAFFIC_FILE: &str = "traffic_stations.json";
pub const META_FILE: &str = "station_meta.json";
pub const EVENTS_FILE: &str = "events.json";
pub const OVERRIDES_DIR: &str = "overrides";
pub const SENSOR_MAPPING_FILE: &str = "sensor_mapping.json";
pub const FFS_OVERRIDES_FILE: &str = "ffs_overrides.json";
pub const CODE_TABLES_FILE: &str = "code_tables.json";
pub const ASSIGNMENT_FILE: &str = "station_assignment.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioHeader {
    pub name: String,
    /// Instant the capture represents; event rules are evaluated here.
    pub recorded_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FfsPair {
    pub ffs_dir1: f64,
    pub ffs_dir2: f64,
}

/// Replacement free flow speeds for stations whose metadata is known to be off.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FfsOverrides {
    #[serde(default = "one")]
    pub version: u32,
    pub stations: BTreeMap<StationId, FfsPair>,
}

fn one() -> u32 {
    1
}

impl FfsOverrides {
    pub fn get(&self, id: StationId) -> Option<FfsPair> {
        self.stations
            .get(&id)
            .copied()
            .filter(|p| p.ffs_dir1 > 0.0 && p.ffs_dir2 > 0.0 && p.ffs_dir1.is_finite() && p.ffs_dir2.is_finite())
    }

    /// Warnings for entries that will be ignored.
    pub fn check(&self, metas: &[StationMeta]) -> Vec<String> {
        let known: BTreeSet<StationId> = metas.iter().map(|m| m.station_id).collect();
        let mut out = Vec::new();
        for (id, pair) in &self.stations {
            if !known.contains(id) {
                out.push(format!("ffs override for unknown station {id} ignored"));
            }
            if self.get(*id).is_none() {
                out.push(format!(
                    "ffs override for station {id} ({}, {}) is not positive; ignored",
                    pair.ffs_dir1, pair.ffs_dir2
                ));
            }
        }
        out
    }
}

/// Returns `meta` with its free flow speeds replaced when a valid override
/// exists for the station.
pub fn apply_ffs_correction(meta: &StationMeta, overrides: &FfsOverrides) -> StationMeta {
    let mut out = meta.clone();
    match overrides.get(meta.station_id) {
        Some(p) => {
            out.ffs_dir1 = Some(p.ffs_dir1);
            out.ffs_dir2 = Some(p.ffs_dir2);
        }
        None if overrides.stations.contains_key(&meta.station_id) => {
            warn!(station = %meta.station_id, "ignoring non-positive ffs override");
        }
        None => {}
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub header: ScenarioHeader,
    pub weather: Vec<StationSnapshot>,
    pub traffic: Vec<StationSnapshot>,
    pub metas: Vec<StationMeta>,
    pub events: Vec<TrafficEvent>,
    pub sensor_mapping: Option<SensorMapping>,
    pub ffs_overrides: Option<FfsOverrides>,
    pub code_tables: Option<CodeTables>,
    pub station_assignment: Option<AssignmentOverrides>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnknownSensor {
    pub station_id: StationId,
    pub kind: StationKind,
    pub name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BundleReport {
    pub weather_snapshots: usize,
    pub traffic_snapshots: usize,
    pub readings: usize,
    pub metas: usize,
    pub events: usize,
    pub unknown_sensors: Vec<UnknownSensor>,
    pub warnings: Vec<String>,
}

impl Bundle {
    pub fn sensor_mapping(&self) -> SensorMapping {
        let mut m = SensorMapping::default();
        if let Some(o) = &self.sensor_mapping {
            m.merge(o);
        }
        m
    }

    pub fn code_tables(&self) -> CodeTables {
        let mut c = CodeTables::default();
        if let Some(o) = &self.code_tables {
            c.merge(o);
        }
        c
    }

    /// Metadata with free flow speed overrides applied.
    pub fn corrected_metas(&self) -> Vec<StationMeta> {
        match &self.ffs_overrides {
            Some(o) => self.metas.iter().map(|m| apply_ffs_correction(m, o)).collect(),
            None => self.metas.clone(),
        }
    }

    pub fn meta(&self, kind: StationKind, id: StationId) -> Option<&StationMeta> {
        self.metas.iter().find(|m| m.kind == kind && m.station_id == id)
    }

    /// Canonical record order, used when writing.
    pub fn normalize(&mut self) {
        for snaps in [&mut self.weather, &mut self.traffic] {
            snaps.sort_by_key(|s| s.station_id);
            for s in snaps.iter_mut() {
                s.readings.sort_by(|a, b| a.sensor_id.cmp(&b.sensor_id).then_with(|| a.name.cmp(&b.name)));
            }
        }
        self.metas.sort_by_key(|m| (m.kind, m.station_id));
        self.events.sort_by(|a, b| a.event_id.cmp(&b.event_id));
    }

    pub fn report(&self) -> BundleReport {
        let mapping = self.sensor_mapping();
        let mut unknown = Vec::new();
        for s in self.weather.iter().chain(&self.traffic) {
            for r in &s.readings {
                if !mapping.knows(&r.name) {
                    unknown.push(UnknownSensor { station_id: s.station_id, kind: s.kind, name: r.name.clone() });
                }
            }
        }
        let mut warnings = Vec::new();
        if let Some(o) = &self.ffs_overrides {
            warnings.extend(o.check(&self.metas));
        }
        for s in self.weather.iter().chain(&self.traffic) {
            if self.meta(s.kind, s.station_id).is_none() {
                warnings.push(format!("{} station {} has no metadata", s.kind.as_str(), s.station_id));
            }
        }
        BundleReport {
            weather_snapshots: self.weather.len(),
            traffic_snapshots: self.traffic.len(),
            readings: self.weather.iter().chain(&self.traffic).map(|s| s.readings.len()).sum(),
            metas: self.metas.len(),
            events: self.events.len(),
            unknown_sensors: unknown,
            warnings,
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IngestError::json(path, e))
}

fn read_required<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<T, IngestError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(IngestError::MissingFile { bundle: dir.to_path_buf(), file: file.to_string() });
    }
    read_json(&path)
}

fn read_optional<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<Option<T>, IngestError> {
    let path = dir.join(OVERRIDES_DIR).join(file);
    if path.is_file() {
        read_json(&path).map(Some)
    } else {
        Ok(None)
    }
}

fn invalid(path: PathBuf, message: String) -> IngestError {
    IngestError::Invalid { path, message }
}

fn check_snapshots(path: PathBuf, kind: StationKind, snaps: &[StationSnapshot]) -> Result<(), IngestError> {
    let mut seen = BTreeSet::new();
    for (i, s) in snaps.iter().enumerate() {
        if s.kind != kind {
            return Err(invalid(path, format!("record {i}: station {} has kind {:?}, expected {kind:?}", s.station_id, s.kind)));
        }
        if !s.coords.is_valid() {
            return Err(invalid(path, format!("record {i}: station {} has invalid coordinates", s.station_id)));
        }
        if !seen.insert(s.station_id) {
            return Err(invalid(path, format!("record {i}: duplicate station {}", s.station_id)));
        }
        for r in &s.readings {
            if r.sensor_id < 1 {
                return Err(invalid(path, format!("record {i}: sensor `{}` has id 0", r.name)));
            }
            if !r.value.is_finite() {
                return Err(invalid(path, format!("record {i}: sensor `{}` value is not finite", r.name)));
            }
        }
    }
    Ok(())
}

fn check_metas(path: PathBuf, metas: &[StationMeta]) -> Result<(), IngestError> {
    let mut seen = BTreeSet::new();
    for (i, m) in metas.iter().enumerate() {
        if !m.coords.is_valid() {
            return Err(invalid(path, format!("record {i}: station {} has invalid coordinates", m.station_id)));
        }
        if !seen.insert((m.kind, m.station_id)) {
            return Err(invalid(path, format!("record {i}: duplicate station {}", m.station_id)));
        }
        let positive = [m.ffs_dir1, m.ffs_dir2, m.capacity_dir1, m.capacity_dir2];
        if positive.iter().flatten().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid(path, format!("record {i}: station {} has non-positive ffs or capacity", m.station_id)));
        }
        if let Some(d) = m.direction {
            if d != 1 && d != 2 {
                return Err(invalid(path, format!("record {i}: direction must be 1 or 2, got {d}")));
            }
        }
    }
    Ok(())
}

fn check_events(path: PathBuf, events: &[TrafficEvent]) -> Result<(), IngestError> {
    let mut seen = BTreeSet::new();
    for (i, e) in events.iter().enumerate() {
        e.validate().map_err(|m| invalid(path.clone(), format!("record {i}: {m}")))?;
        if !seen.insert(e.event_id.as_str()) {
            return Err(invalid(path, format!("record {i}: duplicate event `{}`", e.event_id)));
        }
    }
    Ok(())
}

/// Reads and validates a bundle directory.
pub fn parse_scenario_bundle(dir: impl AsRef<Path>) -> Result<(Bundle, BundleReport), IngestError> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(IngestError::MissingFile { bundle: dir.to_path_buf(), file: SCENARIO_FILE.into() });
    }
    let header: ScenarioHeader = read_required(dir, SCENARIO_FILE)?;
    let weather: Vec<StationSnapshot> = read_required(dir, WEATHER_FILE)?;
    check_snapshots(dir.join(WEATHER_FILE), StationKind::Weather, &weather)?;
    let traffic: Vec<StationSnapshot> = read_required(dir, TRAFFIC_FILE)?;
    check_snapshots(dir.join(TRAFFIC_FILE), StationKind::Traffic, &traffic)?;
    let metas: Vec<StationMeta> = read_required(dir, META_FILE)?;
    check_metas(dir.join(META_FILE), &metas)?;
    let events: Vec<TrafficEvent> = read_required(dir, EVENTS_FILE)?;
    check_events(dir.join(EVENTS_FILE), &events)?;

    let bundle = Bundle {
        header,
        weather,
        traffic,
        metas,
        events,
        sensor_mapping: read_optional(dir, SENSOR_MAPPING_FILE)?,
        ffs_overrides: read_optional(dir, FFS_OVERRIDES_FILE)?,
        code_tables: read_optional(dir, CODE_TABLES_FILE)?,
        station_assignment: read_optional(dir, ASSIGNMENT_FILE)?,
    };
    let report = bundle.report();
    for w in &report.warnings {
        warn!("{}: {w}", dir.display());
    }
    Ok((bundle, report))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), IngestError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| IngestError::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| IngestError::io(path, e))
}

/// Writes the bundle in canonical order. Output bytes depend only on the
/// bundle contents.
pub fn write_scenario_bundle(bundle: &Bundle, dir: impl AsRef<Path>) -> Result<(), IngestError> {
    let dir = dir.as_ref();
    let mut b = bundle.clone();
    b.normalize();
    fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    write_json(&dir.join(SCENARIO_FILE), &b.header)?;
    write_json(&dir.join(WEATHER_FILE), &b.weather)?;
    write_json(&dir.join(TRAFFIC_FILE), &b.traffic)?;
    write_json(&dir.join(META_FILE), &b.metas)?;
    write_json(&dir.join(EVENTS_FILE), &b.events)?;
    let has_overrides = b.sensor_mapping.is_some()
        || b.ffs_overrides.is_some()
        || b.code_tables.is_some()
        || b.station_assignment.is_some();
    if has_overrides {
        let odir = dir.join(OVERRIDES_DIR);
        fs::create_dir_all(&odir).map_err(|e| IngestError::io(&odir, e))?;
        if let Some(m) = &b.sensor_mapping {
            write_json(&odir.join(SENSOR_MAPPING_FILE), m)?;
        }
        if let Some(f) = &b.ffs_overrides {
            write_json(&odir.join(FFS_OVERRIDES_FILE), f)?;
        }
        if let Some(c) = &b.code_tables {
            write_json(&odir.join(CODE_TABLES_FILE), c)?;
        }
        if let Some(a) = &b.station_assignment {
            write_json(&odir.join(ASSIGNMENT_FILE), a)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;
    use crate::geo::Coord;
    use crate::ingest::SensorReading;

    fn at() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 5, 10, 12, 0, 0).unwrap()
    }

    fn snapshot(id: u64, kind: StationKind, names: &[&str]) -> StationSnapshot {
        StationSnapshot {
            station_id: StationId(id),
            kind,
            coords: Coord::new(65.0, 25.5),
            readings: names
                .iter()
                .enumerate()
                .map(|(i, n)| SensorReading {
                    sensor_id: i as u32 + 1,
                    name: (*n).into(),
                    value: 1.0,
                    unit: None,
                    measured_at: at(),
                })
                .collect(),
            recorded_at: at(),
        }
    }

    fn meta(id: u64, kind: StationKind) -> StationMeta {
        StationMeta {
            station_id: StationId(id),
            kind,
            coords: Coord::new(65.0, 25.5),
            road_number: Some(4),
            ffs_dir1: Some(80.0),
            ffs_dir2: Some(78.0),
            capacity_dir1: None,
            capacity_dir2: None,
            direction1_municipality: None,
            direction2_municipality: None,
            direction: None,
        }
    }

    fn two_station_bundle() -> Bundle {
        Bundle {
            header: ScenarioHeader { name: "t".into(), recorded_at: at(), description: None },
            weather: vec![snapshot(1, StationKind::Weather, &["ILMA", "XYZZY"])],
            traffic: vec![snapshot(2, StationKind::Traffic, &["KESKINOPEUS_5MIN_LIUKUVA_SUUNTA1"])],
            metas: vec![meta(1, StationKind::Weather), meta(2, StationKind::Traffic)],
            events: vec![],
            sensor_mapping: None,
            ffs_overrides: None,
            code_tables: None,
            station_assignment: None,
        }
    }

    #[test]
    fn write_then_parse() {
        let dir = tempfile::tempdir().unwrap();
        let b = two_station_bundle();
        write_scenario_bundle(&b, dir.path()).unwrap();
        let (back, report) = parse_scenario_bundle(dir.path()).unwrap();
        assert_eq!(back, b);
        assert_eq!(report.weather_snapshots + report.traffic_snapshots, 2);
        assert_eq!(report.metas, 2);
        assert_eq!(report.events, 0);
        assert_eq!(
            report.unknown_sensors,
            vec![UnknownSensor { station_id: StationId(1), kind: StationKind::Weather, name: "XYZZY".into() }]
        );
    }

    #[test]
    fn truncated_file_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        write_scenario_bundle(&two_station_bundle(), dir.path()).unwrap();
        let p = dir.path().join(WEATHER_FILE);
        let text = fs::read_to_string(&p).unwrap();
        fs::write(&p, &text[..text.len() / 2]).unwrap();
        let err = parse_scenario_bundle(dir.path()).unwrap_err();
        match &err {
            IngestError::Parse { path, line, .. } => {
                assert!(path.ends_with(WEATHER_FILE));
                assert!(*line > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains(WEATHER_FILE));
    }

    #[test]
    fn missing_file_is_a_bundle_error() {
        let dir = tempfile::tempdir().unwrap();
        write_scenario_bundle(&two_station_bundle(), dir.path()).unwrap();
        fs::remove_file(dir.path().join(EVENTS_FILE)).unwrap();
        assert!(matches!(
            parse_scenario_bundle(dir.path()),
            Err(IngestError::MissingFile { file, .. }) if file == EVENTS_FILE
        ));
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = two_station_bundle();
        b.weather[0].kind = StationKind::Traffic;
        write_scenario_bundle(&b, dir.path()).unwrap();
        assert!(matches!(parse_scenario_bundle(dir.path()), Err(IngestError::Invalid { .. })));
    }

    #[test]
    fn ffs_correction() {
        let m = meta(7, StationKind::Traffic);
        let mut o = FfsOverrides::default();
        o.stations.insert(StationId(7), FfsPair { ffs_dir1: 60.0, ffs_dir2: 58.0 });
        let fixed = apply_ffs_correction(&m, &o);
        assert_eq!((fixed.ffs_dir1, fixed.ffs_dir2), (Some(60.0), Some(58.0)));

        let other = meta(8, StationKind::Traffic);
        assert_eq!(apply_ffs_correction(&other, &o), other);

        o.stations.insert(StationId(8), FfsPair { ffs_dir1: 0.0, ffs_dir2: 58.0 });
        assert_eq!(apply_ffs_correction(&other, &o), other);
        let warnings = o.check(std::slice::from_ref(&m));
        assert_eq!(warnings.len(), 2, "{warnings:?}");
    }

    #[test]
    fn ffs_overrides_json_keys() {
        let text = r#"{"version":1,"stations":{"23":{"ffs_dir1":60,"ffs_dir2":58}}}"#;
        let o: FfsOverrides = serde_json::from_str(text).unwrap();
        assert_eq!(o.get(StationId(23)).unwrap().ffs_dir2, 58.0);
    }
}
