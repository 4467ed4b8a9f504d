//! Append-only message log, the recorded form of a streaming intake.
//!
//! Each line is one JSON object tagged by `type`:
//!
//! ```text
//! {"type":"scenario","name":"base","recorded_at":"2024-05-10T12:00:00Z"}
//! {"type":"meta","meta":{...StationMeta...}}
//! {"type":"reading","station_id":1012,"kind":"weather","reading":{...SensorReading...}}
//! {"type":"event","event":{...TrafficEvent...}}
//! ```
//!
//! Replaying folds the log into a bundle: later readings replace earlier
//! ones for the same (station, sensor), later events replace earlier ones
//! with the same id, and every station with metadata becomes a snapshot.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bundle::{Bundle, ScenarioHeader};
use super::{SensorReading, StationId, StationKind, StationMeta, StationSnapshot, TrafficEvent};
use crate::error::IngestError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Scenario(ScenarioHeader),
    Meta { meta: StationMeta },
    Reading { station_id: StationId, kind: StationKind, reading: SensorReading },
    Event { event: TrafficEvent },
}

pub fn append_record(path: impl AsRef<Path>, record: &LogRecord) -> Result<(), IngestError> {
    let path = path.as_ref();
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| IngestError::io(path, e))?;
    let line = serde_json::to_string(record).map_err(|e| IngestError::json(path, e))?;
    writeln!(f, "{line}").map_err(|e| IngestError::io(path, e))
}

pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<LogRecord>, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| IngestError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Folds records into a bundle.
pub fn replay(records: &[LogRecord]) -> Result<Bundle, String> {
    let mut header = None;
    let mut metas: BTreeMap<(StationKind, StationId), StationMeta> = BTreeMap::new();
    let mut readings: BTreeMap<(StationKind, StationId), BTreeMap<u32, SensorReading>> = BTreeMap::new();
    let mut events: BTreeMap<String, TrafficEvent> = BTreeMap::new();

    for (i, r) in records.iter().enumerate() {
        match r {
            LogRecord::Scenario(h) => header = Some(h.clone()),
            LogRecord::Meta { meta } => {
                metas.insert((meta.kind, meta.station_id), meta.clone());
            }
            LogRecord::Reading { station_id, kind, reading } => {
                if reading.sensor_id < 1 || !reading.value.is_finite() {
                    return Err(format!("record {}: invalid reading `{}`", i + 1, reading.name));
                }
                readings.entry((*kind, *station_id)).or_default().insert(reading.sensor_id, reading.clone());
            }
            LogRecord::Event { event } => {
                event.validate().map_err(|m| format!("record {}: {m}", i + 1))?;
                events.insert(event.event_id.clone(), event.clone());
            }
        }
    }

    let header = header.ok_or("log has no scenario record")?;
    if let Some((kind, id)) = readings.keys().find(|k| !metas.contains_key(k)) {
        return Err(format!("readings for {} station {id} without metadata", kind.as_str()));
    }

    let mut weather = Vec::new();
    let mut traffic = Vec::new();
    for ((kind, id), meta) in &metas {
        let snap = StationSnapshot {
            station_id: *id,
            kind: *kind,
            coords: meta.coords,
            readings: readings.get(&(*kind, *id)).map(|m| m.values().cloned().collect()).unwrap_or_default(),
            recorded_at: header.recorded_at,
        };
        match kind {
            StationKind::Weather => weather.push(snap),
            StationKind::Traffic => traffic.push(snap),
        }
    }

    let mut bundle = Bundle {
        header,
        weather,
        traffic,
        metas: metas.into_values().collect(),
        events: events.into_values().collect(),
        sensor_mapping: None,
        ffs_overrides: None,
        code_tables: None,
        station_assignment: None,
    };
    bundle.normalize();
    Ok(bundle)
}

pub fn replay_file(path: impl AsRef<Path>) -> Result<Bundle, IngestError> {
    let path = path.as_ref();
    let records = read_log(path)?;
    replay(&records).map_err(|message| IngestError::Invalid { path: path.to_path_buf(), message })
}

/// The records that reproduce `bundle` when replayed (overrides excluded).
pub fn bundle_to_records(bundle: &Bundle) -> Vec<LogRecord> {
    let mut b = bundle.clone();
    b.normalize();
    let mut out = vec![LogRecord::Scenario(b.header.clone())];
    out.extend(b.metas.iter().map(|m| LogRecord::Meta { meta: m.clone() }));
    for s in b.weather.iter().chain(&b.traffic) {
        out.extend(s.readings.iter().map(|r| LogRecord::Reading {
            station_id: s.station_id,
            kind: s.kind,
            reading: r.clone(),
        }));
    }
    out.extend(b.events.iter().map(|e| LogRecord::Event { event: e.clone() }));
    out
}

#[cfg(test)]
mod tests {
    use chrono::{TimeZone, Utc};

    use super::*;
    use crate::geo::Coord;

    fn meta(id: u64, kind: StationKind) -> StationMeta {
        StationMeta {
            station_id: StationId(id),
            kind,
            coords: Coord::new(65.0, 25.0),
            road_number: None,
            ffs_dir1: None,
            ffs_dir2: None,
            capacity_dir1: None,
            capacity_dir2: None,
            direction1_municipality: None,
            direction2_municipality: None,
            direction: None,
        }
    }

    fn reading(sensor_id: u32, value: f64) -> SensorReading {
        SensorReading {
            sensor_id,
            name: "ILMA".into(),
            value,
            unit: None,
            measured_at: Utc.with_ymd_and_hms(2024, 5, 10, 12, 0, 0).unwrap(),
        }
    }

    fn header() -> LogRecord {
        LogRecord::Scenario(ScenarioHeader {
            name: "x".into(),
            recorded_at: Utc.with_ymd_and_hms(2024, 5, 10, 12, 0, 0).unwrap(),
            description: None,
        })
    }

    #[test]
    fn later_readings_replace_earlier() {
        let recs = vec![
            header(),
            LogRecord::Meta { meta: meta(1, StationKind::Weather) },
            LogRecord::Reading { station_id: StationId(1), kind: StationKind::Weather, reading: reading(1, 3.0) },
            LogRecord::Reading { station_id: StationId(1), kind: StationKind::Weather, reading: reading(1, 4.0) },
        ];
        let b = replay(&recs).unwrap();
        assert_eq!(b.weather[0].readings.len(), 1);
        assert_eq!(b.weather[0].readings[0].value, 4.0);
    }

    #[test]
    fn silent_station_has_empty_readings() {
        let b = replay(&[header(), LogRecord::Meta { meta: meta(5, StationKind::Traffic) }]).unwrap();
        assert_eq!(b.traffic.len(), 1);
        assert!(b.traffic[0].readings.is_empty());
    }

    #[test]
    fn reading_without_meta_is_rejected() {
        let recs = vec![
            header(),
            LogRecord::Reading { station_id: StationId(9), kind: StationKind::Weather, reading: reading(1, 3.0) },
        ];
        assert!(replay(&recs).is_err());
        assert!(replay(&[]).is_err());
    }

    #[test]
    fn log_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("capture.jsonl");
        let recs = vec![
            header(),
            LogRecord::Meta { meta: meta(1, StationKind::Weather) },
            LogRecord::Reading { station_id: StationId(1), kind: StationKind::Weather, reading: reading(2, 1.0) },
        ];
        for r in &recs {
            append_record(&path, r).unwrap();
        }
        assert_eq!(read_log(&path).unwrap(), recs);
        let b = replay_file(&path).unwrap();
        assert_eq!(replay(&bundle_to_records(&b)).unwrap(), b);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        append_record(&path, &header()).unwrap();
        fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{\"type\":\"meta\",\n").unwrap();
        match read_log(&path) {
            Err(IngestError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
