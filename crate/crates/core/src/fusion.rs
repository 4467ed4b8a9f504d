//! From canonical attributes to station weights and per-segment weight
//! vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::FusionError;
use crate::graph::{geojson::segment_feature, RoadNetwork, RoadSegment, SegmentStations};
use crate::ingest::{
    freezing_point_delta, resolve_point_difference, resolve_precipitation, AttributeId, CanonicalAttributes,
    PointContext, StationId, StationMeta,
};
use crate::weights::{
    accident_weight, air_temperature_weight, road_temperature_weight, road_work_weight, RoadWorkSeverity, ScaleKey,
    ScaleRegistry, UnitWeight,
};

/// The fifteen weather factors, each absent when its input is missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeatherFactors {
    pub surface_condition: Option<UnitWeight>,
    pub freezing_point_diff: Option<UnitWeight>,
    pub surface_dew_frost_diff: Option<UnitWeight>,
    pub friction: Option<UnitWeight>,
    pub moisture: Option<UnitWeight>,
    pub snow_depth: Option<UnitWeight>,
    pub road_temperature: Option<UnitWeight>,

    pub relative_humidity: Option<UnitWeight>,
    pub precipitation_intensity: Option<UnitWeight>,
    pub precipitation_type: Option<UnitWeight>,
    pub visible_distance: Option<UnitWeight>,
    pub air_dew_frost_diff: Option<UnitWeight>,

    pub air_temperature: Option<UnitWeight>,
    pub average_wind: Option<UnitWeight>,
    pub maximum_wind: Option<UnitWeight>,
}

impl WeatherFactors {
    pub fn surface(&self) -> [Option<UnitWeight>; 7] {
        [
            self.surface_condition,
            self.freezing_point_diff,
            self.surface_dew_frost_diff,
            self.friction,
            self.moisture,
            self.snow_depth,
            self.road_temperature,
        ]
    }

    pub fn visibility(&self) -> [Option<UnitWeight>; 5] {
        [
            self.relative_humidity,
            self.precipitation_intensity,
            self.precipitation_type,
            self.visible_distance,
            self.air_dew_frost_diff,
        ]
    }

    pub fn environmental(&self) -> [Option<UnitWeight>; 3] {
        [self.air_temperature, self.average_wind, self.maximum_wind]
    }

    pub fn present(&self) -> usize {
        self.surface().iter().chain(&self.visibility()).chain(&self.environmental()).flatten().count()
    }
}

pub fn compute_weather_factors(attrs: &CanonicalAttributes) -> WeatherFactors {
    compute_weather_factors_with(attrs, &ScaleRegistry::default())
}

/// Factors using the given scale registry. Canonical values are finite, so
/// every present input yields a present factor.
pub fn compute_weather_factors_with(attrs: &CanonicalAttributes, scales: &ScaleRegistry) -> WeatherFactors {
    let scaled = |key: ScaleKey, id: AttributeId| attrs.get(id).and_then(|v| scales.weight(key, v).ok());
    let diff = |v: Option<f64>| v.and_then(|d| scales.weight(ScaleKey::TempPointDiff, d).ok());
    let road_t = attrs.get(AttributeId::RoadTemperature);
    let air_t = attrs.get(AttributeId::AirTemperature);

    let freezing = match (road_t, attrs.get(AttributeId::FreezingPoint)) {
        (Some(t), Some(fp)) => freezing_point_delta(t, fp).ok(),
        _ => None,
    };

    WeatherFactors {
        surface_condition: attrs.surface_state.map(|s| s.weight()),
        freezing_point_diff: diff(freezing),
        surface_dew_frost_diff: diff(resolve_point_difference(attrs, PointContext::Surface, road_t)),
        friction: scaled(ScaleKey::Friction, AttributeId::Friction),
        moisture: scaled(ScaleKey::Moisture, AttributeId::Moisture),
        snow_depth: scaled(ScaleKey::SnowDepth, AttributeId::SnowDepth),
        road_temperature: road_t.and_then(|t| road_temperature_weight(t).ok()),

        relative_humidity: scaled(ScaleKey::RelativeHumidity, AttributeId::RelativeHumidity),
        precipitation_intensity: scaled(ScaleKey::PrecipitationIntensity, AttributeId::PrecipitationIntensity),
        precipitation_type: resolve_precipitation(attrs).map(|p| p.weight()),
        visible_distance: scaled(ScaleKey::VisibleDistance, AttributeId::VisibleDistance),
        air_dew_frost_diff: diff(resolve_point_difference(attrs, PointContext::Air, air_t)),

        air_temperature: air_t.and_then(|t| air_temperature_weight(t).ok()),
        average_wind: scaled(ScaleKey::AverageWind, AttributeId::AverageWind),
        maximum_wind: scaled(ScaleKey::MaximumWind, AttributeId::MaximumWind),
    }
}

/// Mean of the present values; absent when none are present.
pub fn group_weight(factors: &[Option<UnitWeight>]) -> Option<UnitWeight> {
    let present: Vec<f64> = factors.iter().flatten().map(|w| w.value()).collect();
    if present.is_empty() {
        return None;
    }
    Some(UnitWeight::saturating(present.iter().sum::<f64>() / present.len() as f64))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupWeights {
    pub surface: Option<UnitWeight>,
    pub visibility: Option<UnitWeight>,
    pub environmental: Option<UnitWeight>,
}

impl GroupWeights {
    pub fn from_factors(f: &WeatherFactors) -> Self {
        GroupWeights {
            surface: group_weight(&f.surface()),
            visibility: group_weight(&f.visibility()),
            environmental: group_weight(&f.environmental()),
        }
    }
}

/// `(full, environmental)`: the mean of all present groups, and the mean
/// of the present visibility and environmental groups.
pub fn station_weather_weights(g: &GroupWeights) -> (Option<UnitWeight>, Option<UnitWeight>) {
    (
        group_weight(&[g.surface, g.visibility, g.environmental]),
        group_weight(&[g.visibility, g.environmental]),
    )
}

pub fn traffic_weight(ffs_factor: Option<UnitWeight>, occupancy_factor: Option<UnitWeight>) -> Option<UnitWeight> {
    group_weight(&[ffs_factor, occupancy_factor])
}

/// Speed and occupancy percentages for a traffic station.
///
/// `original` is the metadata as published and `corrected` the one with
/// free flow speed overrides applied. When an override changes the free
/// flow speed, the percentage is recomputed against it from the measured
/// speed (or from the speed implied by the reported percentage and the
/// published free flow speed). Occupancy falls back to hourly volume over
/// capacity.
pub fn traffic_percentages(
    attrs: &CanonicalAttributes,
    original: Option<&StationMeta>,
    corrected: Option<&StationMeta>,
) -> (Option<f64>, Option<f64>) {
    let reported = attrs.get(AttributeId::FfsPercent);
    let speed = attrs.get(AttributeId::AverageSpeed);
    let ffs_orig = original.and_then(StationMeta::ffs).filter(|f| *f > 0.0);
    let ffs_corr = corrected.and_then(StationMeta::ffs).filter(|f| *f > 0.0);

    let ffs_pct = match ffs_corr {
        Some(fc) if ffs_orig != Some(fc) => {
            let speed = speed.or_else(|| Some(reported? * ffs_orig? / 100.0));
            speed.map(|s| s / fc * 100.0).or(reported)
        }
        _ => reported.or_else(|| Some(speed? / ffs_corr? * 100.0)),
    };
    let capacity = corrected.and_then(StationMeta::capacity).filter(|c| *c > 0.0);
    let occupancy = attrs
        .get(AttributeId::OccupancyPercent)
        .or_else(|| Some(attrs.get(AttributeId::HourlyVolume)? / capacity? * 100.0));
    (ffs_pct, occupancy)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StationWeights {
    pub full_weather: Option<UnitWeight>,
    pub environmental_weather: Option<UnitWeight>,
    pub traffic: Option<UnitWeight>,
}

impl StationWeights {
    pub fn weather(groups: &GroupWeights) -> Self {
        let (full_weather, environmental_weather) = station_weather_weights(groups);
        StationWeights { full_weather, environmental_weather, traffic: None }
    }

    pub fn traffic(ffs_factor: Option<UnitWeight>, occupancy_factor: Option<UnitWeight>) -> Self {
        StationWeights { traffic: traffic_weight(ffs_factor, occupancy_factor), ..Default::default() }
    }
}

pub fn event_weight(roadwork: UnitWeight, accident: UnitWeight) -> UnitWeight {
    if accident.value() > roadwork.value() {
        accident
    } else {
        roadwork
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LengthMode {
    /// Kilometers, unscaled.
    #[default]
    #[serde(rename = "raw")]
    RawKilometers,
    /// Divided by the longest segment in the network.
    #[serde(rename = "normalized")]
    NormalizedByMax,
}

impl LengthMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LengthMode::RawKilometers => "raw",
            LengthMode::NormalizedByMax => "normalized",
        }
    }
}

impl fmt::Display for LengthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LengthMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(LengthMode::RawKilometers),
            "normalized" => Ok(LengthMode::NormalizedByMax),
            _ => Err(format!("unknown length mode `{s}` (expected raw or normalized)")),
        }
    }
}

pub fn length_weight(length_m: f64, mode: LengthMode, normalizer_m: Option<f64>) -> Result<f64, FusionError> {
    if !(length_m > 0.0 && length_m.is_finite()) {
        return Err(FusionError::BadLength(length_m));
    }
    match mode {
        LengthMode::RawKilometers => Ok(length_m / 1000.0),
        LengthMode::NormalizedByMax => match normalizer_m {
            Some(n) if n > 0.0 && n.is_finite() => Ok(length_m / n),
            _ => Err(FusionError::MissingNormalizer),
        },
    }
}

/// Per-segment cost basis, in the order length, traffic, weather, events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentWeightVector {
    pub length: f64,
    pub traffic: f64,
    pub weather: f64,
    pub events: f64,
}

impl SegmentWeightVector {
    pub fn new(length: f64, traffic: f64, weather: f64, events: f64) -> Self {
        SegmentWeightVector { length, traffic, weather, events }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.length, self.traffic, self.weather, self.events]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        SegmentWeightVector::new(a[0], a[1], a[2], a[3])
    }
}

/// Which station weight ended up in a segment's weather entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherSource {
    Full,
    Environmental,
    Secondary,
    Missing,
}

/// Event state of one segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentEvents {
    pub roadwork: RoadWorkSeverity,
    pub accident: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentWeights {
    pub vector: SegmentWeightVector,
    /// Weather or traffic had no data and was counted as 0.
    pub data_incomplete: bool,
    pub weather_source: WeatherSource,
}

/// Builds a segment's weight vector. Weather is the full weight when the
/// weather station is on the same road and has one, otherwise the
/// environmental weight; a silent station falls back to its secondary's
/// environmental weight. Missing weather or traffic counts as 0 and marks
/// the result incomplete.
pub fn assemble_segment_vector(
    segment: &RoadSegment,
    stations: &SegmentStations,
    weather: &BTreeMap<StationId, StationWeights>,
    traffic: &BTreeMap<StationId, StationWeights>,
    events: SegmentEvents,
    mode: LengthMode,
    normalizer_m: Option<f64>,
) -> Result<SegmentWeights, FusionError> {
    let primary = weather.get(&stations.weather);
    let (weather_w, weather_source) = match primary {
        Some(w) if stations.same_road && w.full_weather.is_some() => (w.full_weather, WeatherSource::Full),
        Some(w) if w.environmental_weather.is_some() => (w.environmental_weather, WeatherSource::Environmental),
        _ => match stations.secondary_weather.and_then(|s| weather.get(&s)?.environmental_weather) {
            Some(w) => (Some(w), WeatherSource::Secondary),
            None => (None, WeatherSource::Missing),
        },
    };
    let traffic_w = traffic
        .get(&stations.traffic)
        .and_then(|t| t.traffic)
        .or_else(|| traffic.get(&stations.secondary_traffic?)?.traffic);

    let events_w = event_weight(road_work_weight(events.roadwork), accident_weight(events.accident));
    let vector = SegmentWeightVector::new(
        length_weight(segment.length_m, mode, normalizer_m)?,
        traffic_w.map_or(0.0, UnitWeight::value),
        weather_w.map_or(0.0, UnitWeight::value),
        events_w.value(),
    );
    Ok(SegmentWeights { vector, data_incomplete: weather_w.is_none() || traffic_w.is_none(), weather_source })
}

/// The weight map as a FeatureCollection of segment LineStrings, in
/// network order.
pub fn weights_to_geojson(network: &RoadNetwork, weights: &BTreeMap<String, SegmentWeights>) -> Value {
    let features: Vec<Value> = network
        .segments()
        .iter()
        .filter_map(|seg| {
            let w = weights.get(&seg.id)?;
            let mut props = serde_json::Map::new();
            props.insert("length".into(), json!(w.vector.length));
            props.insert("traffic".into(), json!(w.vector.traffic));
            props.insert("weather".into(), json!(w.vector.weather));
            props.insert("events".into(), json!(w.vector.events));
            props.insert("data_incomplete".into(), json!(w.data_incomplete));
            props.insert("weather_source".into(), json!(w.weather_source));
            Some(segment_feature(seg, props))
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}
