use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{RoadNetwork, RoadSegment};
use crate::error::GraphError;
use crate::geo::{haversine_m, polyline_midpoint, Coord};
use crate::ingest::{StationId, StationKind, StationMeta};

/// Forces the station used for one segment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weather: Option<StationId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<StationId>,
}

/// Manual adjustments to the nearest-station assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentOverrides {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub segments: BTreeMap<String, SegmentOverride>,
    /// Station used when the key station reports nothing.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub secondary_weather: BTreeMap<StationId, StationId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub secondary_traffic: BTreeMap<StationId, StationId>,
    /// A weather station on the segment's own road within this distance
    /// of the midpoint beats any nearer station on another road.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub same_road_radius_m: Option<f64>,
}

fn default_version() -> u32 {
    1
}

impl Default for AssignmentOverrides {
    fn default() -> Self {
        AssignmentOverrides {
            version: 1,
            segments: BTreeMap::new(),
            secondary_weather: BTreeMap::new(),
            secondary_traffic: BTreeMap::new(),
            same_road_radius_m: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentStations {
    pub weather: StationId,
    /// The weather station sits on the segment's road.
    pub same_road: bool,
    pub traffic: StationId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_weather: Option<StationId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_traffic: Option<StationId>,
}

/// Segment id to its stations, ordered by segment id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationAssignment(pub BTreeMap<String, SegmentStations>);

impl StationAssignment {
    pub fn get(&self, segment_id: &str) -> Option<&SegmentStations> {
        self.0.get(segment_id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SegmentStations)> {
        self.0.iter()
    }
}

fn nearest<'a>(stations: &[&'a StationMeta], at: Coord) -> Option<(&'a StationMeta, f64)> {
    let mut best: Option<(&StationMeta, f64)> = None;
    for s in stations {
        let d = haversine_m(s.coords, at);
        if best.is_none_or(|(b, bd)| d < bd || (d == bd && s.station_id < b.station_id)) {
            best = Some((s, d));
        }
    }
    best
}

fn find<'a>(list: &[&'a StationMeta], id: StationId) -> Option<&'a StationMeta> {
    list.iter().find(|m| m.station_id == id).copied()
}

fn segment_midpoint(seg: &RoadSegment) -> Coord {
    polyline_midpoint(&seg.geometry).unwrap_or(seg.geometry[0])
}

/// Assigns every segment the weather and traffic station closest to its
/// midpoint (ties to the smaller station id), then applies `overrides`.
pub fn assign_stations(
    network: &RoadNetwork,
    metas: &[StationMeta],
    overrides: Option<&AssignmentOverrides>,
) -> Result<StationAssignment, GraphError> {
    let weather: Vec<&StationMeta> = metas.iter().filter(|m| m.kind == StationKind::Weather).collect();
    let traffic: Vec<&StationMeta> = metas.iter().filter(|m| m.kind == StationKind::Traffic).collect();
    if weather.is_empty() {
        return Err(GraphError::NoStations("weather"));
    }
    if traffic.is_empty() {
        return Err(GraphError::NoStations("traffic"));
    }
    let default = AssignmentOverrides::default();
    let ov = overrides.unwrap_or(&default);
    validate_overrides(network, &weather, &traffic, ov)?;

    let mut out = BTreeMap::new();
    for seg in network.segments() {
        let mid = segment_midpoint(seg);
        let forced = ov.segments.get(&seg.id);

        let w = match forced.and_then(|f| f.weather) {
            Some(id) => find(&weather, id).expect("validated"),
            None => {
                let (mut w, _) = nearest(&weather, mid).expect("non-empty");
                if let (Some(radius), Some(road)) = (ov.same_road_radius_m, seg.road_number) {
                    let on_road: Vec<&StationMeta> =
                        weather.iter().copied().filter(|m| m.road_number == Some(road)).collect();
                    if let Some((s, d)) = nearest(&on_road, mid) {
                        if d <= radius {
                            w = s;
                        }
                    }
                }
                w
            }
        };
        let t = match forced.and_then(|f| f.traffic) {
            Some(id) => find(&traffic, id).expect("validated"),
            None => nearest(&traffic, mid).expect("non-empty").0,
        };
        let same_road = matches!((w.road_number, seg.road_number), (Some(a), Some(b)) if a == b);
        out.insert(
            seg.id.clone(),
            SegmentStations {
                weather: w.station_id,
                same_road,
                traffic: t.station_id,
                secondary_weather: ov.secondary_weather.get(&w.station_id).copied(),
                secondary_traffic: ov.secondary_traffic.get(&t.station_id).copied(),
            },
        );
    }
    Ok(StationAssignment(out))
}

fn validate_overrides(
    network: &RoadNetwork,
    weather: &[&StationMeta],
    traffic: &[&StationMeta],
    ov: &AssignmentOverrides,
) -> Result<(), GraphError> {
    let known = |list: &[&StationMeta], id: StationId| list.iter().any(|m| m.station_id == id);
    for (seg, o) in &ov.segments {
        if network.segment(seg).is_none() {
            return Err(GraphError::Config(format!("override for unknown segment `{seg}`")));
        }
        if let Some(id) = o.weather.filter(|id| !known(weather, *id)) {
            return Err(GraphError::Config(format!("segment `{seg}` forced to unknown weather station {id}")));
        }
        if let Some(id) = o.traffic.filter(|id| !known(traffic, *id)) {
            return Err(GraphError::Config(format!("segment `{seg}` forced to unknown traffic station {id}")));
        }
    }
    for (kind, map, list) in [("weather", &ov.secondary_weather, weather), ("traffic", &ov.secondary_traffic, traffic)] {
        for (a, b) in map {
            for id in [a, b] {
                if !known(list, *id) {
                    return Err(GraphError::Config(format!("secondary {kind} mapping references unknown station {id}")));
                }
            }
        }
    }
    if let Some(r) = ov.same_road_radius_m {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(GraphError::Config(format!("same_road_radius_m must be a non-negative number, got {r}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, NodeId};
    use crate::geo::polyline_length;

    fn seg(id: &str, road: u32, a: u64, b: u64, pa: Coord, pb: Coord) -> RoadSegment {
        let geometry = vec![pa, pb];
        RoadSegment {
            id: id.into(),
            road_number: Some(road),
            from_node: NodeId(a),
            to_node: NodeId(b),
            length_m: polyline_length(&geometry).unwrap(),
            geometry,
        }
    }

    fn station(id: u64, kind: StationKind, lat: f64, lon: f64, road: Option<u32>) -> StationMeta {
        StationMeta {
            station_id: StationId(id),
            kind,
            coords: Coord::new(lat, lon),
            road_number: road,
            ffs_dir1: None,
            ffs_dir2: None,
            capacity_dir1: None,
            capacity_dir2: None,
            direction1_municipality: None,
            direction2_municipality: None,
            direction: None,
        }
    }

    fn network() -> RoadNetwork {
        let (p, q, r) = (Coord::new(65.0, 25.0), Coord::new(65.0, 25.1), Coord::new(65.0, 25.2));
        build_graph(vec![seg("a", 4, 1, 2, p, q), seg("b", 20, 2, 3, q, r)]).unwrap()
    }

    #[test]
    fn single_station_takes_everything() {
        let metas = [
            station(1, StationKind::Weather, 65.01, 25.1, Some(4)),
            station(9, StationKind::Traffic, 65.0, 25.1, None),
        ];
        let a = assign_stations(&network(), &metas, None).unwrap();
        assert_eq!(a.len(), 2);
        assert!(a.get("a").unwrap().same_road);
        assert!(!a.get("b").unwrap().same_road);
        assert!(a.iter().all(|(_, s)| s.weather == StationId(1) && s.traffic == StationId(9)));
    }

    #[test]
    fn same_road_radius_beats_nearer_station() {
        let metas = [
            station(1, StationKind::Weather, 65.001, 25.05, Some(99)),
            station(2, StationKind::Weather, 65.0, 25.08, Some(4)),
            station(9, StationKind::Traffic, 65.0, 25.1, None),
        ];
        let a = assign_stations(&network(), &metas, None).unwrap();
        assert_eq!(a.get("a").unwrap().weather, StationId(1));
        let ov = AssignmentOverrides { same_road_radius_m: Some(5_000.0), ..Default::default() };
        let a = assign_stations(&network(), &metas, Some(&ov)).unwrap();
        let s = a.get("a").unwrap();
        assert_eq!((s.weather, s.same_road), (StationId(2), true));
    }

    #[test]
    fn forced_and_secondary_overrides() {
        let metas = [
            station(1, StationKind::Weather, 65.0, 25.05, None),
            station(2, StationKind::Weather, 66.0, 25.05, Some(4)),
            station(9, StationKind::Traffic, 65.0, 25.1, None),
        ];
        let mut ov = AssignmentOverrides::default();
        ov.segments.insert("a".into(), SegmentOverride { weather: Some(StationId(2)), traffic: None });
        ov.secondary_weather.insert(StationId(1), StationId(2));
        let a = assign_stations(&network(), &metas, Some(&ov)).unwrap();
        assert_eq!(a.get("a").unwrap().weather, StationId(2));
        assert_eq!(a.get("b").unwrap().secondary_weather, Some(StationId(2)));

        ov.segments.insert("a".into(), SegmentOverride { weather: Some(StationId(77)), traffic: None });
        assert!(matches!(assign_stations(&network(), &metas, Some(&ov)), Err(GraphError::Config(_))));
    }

    #[test]
    fn equidistant_stations_pick_smaller_id() {
        let net = build_graph(vec![seg("a", 4, 1, 2, Coord::new(65.0, 25.0), Coord::new(65.0, 25.1))]).unwrap();
        let same = [
            station(8, StationKind::Weather, 65.0, 25.05, None),
            station(3, StationKind::Weather, 65.0, 25.05, None),
            station(9, StationKind::Traffic, 65.0, 25.1, None),
        ];
        assert_eq!(assign_stations(&net, &same, None).unwrap().get("a").unwrap().weather, StationId(3));
    }

    #[test]
    fn requires_both_kinds() {
        let metas = [station(1, StationKind::Weather, 65.0, 25.0, None)];
        assert_eq!(assign_stations(&network(), &metas, None).unwrap_err(), GraphError::NoStations("traffic"));
    }
}
