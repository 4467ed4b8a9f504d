use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tracing::debug;

use super::SensorReading;
use crate::error::WeightError;
use crate::weights::{CoarsePrecipitation, PrecipitationType, SurfaceState, UnitWeight};

/// Canonical attribute vocabulary. Several raw sensors may feed one id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeId {
    SurfaceState,
    Friction,
    /// Water layer on the road, mm.
    Moisture,
    /// cm.
    SnowDepth,
    RoadTemperature,
    SurfaceDewPointDiff,
    SurfaceFrostPointDiff,
    /// The "true" freezing point of the surface, °C.
    FreezingPoint,
    RelativeHumidity,
    PrecipitationIntensity,
    PrecipitationType,
    CoarsePrecipitation,
    VisibleDistance,
    AirDewPointDiff,
    AirFrostPointDiff,
    AirTemperature,
    AverageWind,
    MaximumWind,
    /// Average speed as a percentage of free flow speed.
    FfsPercent,
    /// Average speed, km/h.
    AverageSpeed,
    /// Volume-to-capacity percentage.
    OccupancyPercent,
    /// Vehicles per hour.
    HourlyVolume,
}

impl AttributeId {
    pub const ALL: [AttributeId; 22] = [
        AttributeId::SurfaceState,
        AttributeId::Friction,
        AttributeId::Moisture,
        AttributeId::SnowDepth,
        AttributeId::RoadTemperature,
        AttributeId::SurfaceDewPointDiff,
        AttributeId::SurfaceFrostPointDiff,
        AttributeId::FreezingPoint,
        AttributeId::RelativeHumidity,
        AttributeId::PrecipitationIntensity,
        AttributeId::PrecipitationType,
        AttributeId::CoarsePrecipitation,
        AttributeId::VisibleDistance,
        AttributeId::AirDewPointDiff,
        AttributeId::AirFrostPointDiff,
        AttributeId::AirTemperature,
        AttributeId::AverageWind,
        AttributeId::MaximumWind,
        AttributeId::FfsPercent,
        AttributeId::AverageSpeed,
        AttributeId::OccupancyPercent,
        AttributeId::HourlyVolume,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeId::SurfaceState => "surface_state",
            AttributeId::Friction => "friction",
            AttributeId::Moisture => "moisture",
            AttributeId::SnowDepth => "snow_depth",
            AttributeId::RoadTemperature => "road_temperature",
            AttributeId::SurfaceDewPointDiff => "surface_dew_point_diff",
            AttributeId::SurfaceFrostPointDiff => "surface_frost_point_diff",
            AttributeId::FreezingPoint => "freezing_point",
            AttributeId::RelativeHumidity => "relative_humidity",
            AttributeId::PrecipitationIntensity => "precipitation_intensity",
            AttributeId::PrecipitationType => "precipitation_type",
            AttributeId::CoarsePrecipitation => "coarse_precipitation",
            AttributeId::VisibleDistance => "visible_distance",
            AttributeId::AirDewPointDiff => "air_dew_point_diff",
            AttributeId::AirFrostPointDiff => "air_frost_point_diff",
            AttributeId::AirTemperature => "air_temperature",
            AttributeId::AverageWind => "average_wind",
            AttributeId::MaximumWind => "maximum_wind",
            AttributeId::FfsPercent => "ffs_percent",
            AttributeId::AverageSpeed => "average_speed",
            AttributeId::OccupancyPercent => "occupancy_percent",
            AttributeId::HourlyVolume => "hourly_volume",
        }
    }

    pub fn is_categorical(self) -> bool {
        matches!(
            self,
            AttributeId::SurfaceState | AttributeId::PrecipitationType | AttributeId::CoarsePrecipitation
        )
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttributeId {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttributeId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| WeightError::UnknownAttribute(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub name: String,
    pub attribute: AttributeId,
    /// Only applies to traffic stations monitoring this direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<u8>,
}

/// Raw sensor name to canonical attribute table. Canonical attribute names
/// themselves always map to their own id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMapping {
    #[serde(default = "one")]
    pub version: u32,
    pub sensors: Vec<MappingEntry>,
}

fn one() -> u32 {
    1
}

const DEFAULT_SENSORS: &[(&str, AttributeId, Option<u8>)] = &[
    ("ILMA", AttributeId::AirTemperature, None),
    ("TIE_1", AttributeId::RoadTemperature, None),
    ("TIE_2", AttributeId::RoadTemperature, None),
    ("TIE_3", AttributeId::RoadTemperature, None),
    ("TIE_4", AttributeId::RoadTemperature, None),
    ("KESKITUULI", AttributeId::AverageWind, None),
    ("MAKSIMITUULI", AttributeId::MaximumWind, None),
    ("ILMAN_KOSTEUS", AttributeId::RelativeHumidity, None),
    ("NÄKYVYYS_M", AttributeId::VisibleDistance, None),
    ("SADE_INTENSITEETTI", AttributeId::PrecipitationIntensity, None),
    ("SATEEN_OLOMUOTO_PWDXX", AttributeId::PrecipitationType, None),
    ("SADE", AttributeId::CoarsePrecipitation, None),
    ("KELI_1", AttributeId::SurfaceState, None),
    ("KELI_2", AttributeId::SurfaceState, None),
    ("KITKA1_LUKU", AttributeId::Friction, None),
    ("KITKA2_LUKU", AttributeId::Friction, None),
    ("VEDEN_MÄÄRÄ1", AttributeId::Moisture, None),
    ("VEDEN_MÄÄRÄ2", AttributeId::Moisture, None),
    ("LUMEN_SYVYYS", AttributeId::SnowDepth, None),
    ("KASTEPISTE_ERO_TIE", AttributeId::SurfaceDewPointDiff, None),
    ("HÄRMÄPISTE_ERO_TIE", AttributeId::SurfaceFrostPointDiff, None),
    ("KASTEPISTE_ERO_ILMA", AttributeId::AirDewPointDiff, None),
    ("HÄRMÄPISTE_ERO_ILMA", AttributeId::AirFrostPointDiff, None),
    ("JÄÄTYMISPISTE_1", AttributeId::FreezingPoint, None),
    ("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA1_VVAPAAS1", AttributeId::FfsPercent, Some(1)),
    ("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA2_VVAPAAS2", AttributeId::FfsPercent, Some(2)),
    ("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA1", AttributeId::AverageSpeed, Some(1)),
    ("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA2", AttributeId::AverageSpeed, Some(2)),
    ("OHITUKSET_5MIN_LIUKUVA_SUUNTA1_MS1", AttributeId::OccupancyPercent, Some(1)),
    ("OHITUKSET_5MIN_LIUKUVA_SUUNTA2_MS2", AttributeId::OccupancyPercent, Some(2)),
    ("OHITUKSET_5MIN_LIUKUVA_SUUNTA1", AttributeId::HourlyVolume, Some(1)),
    ("OHITUKSET_5MIN_LIUKUVA_SUUNTA2", AttributeId::HourlyVolume, Some(2)),
];

impl Default for SensorMapping {
    fn default() -> Self {
        SensorMapping {
            version: 1,
            sensors: DEFAULT_SENSORS
                .iter()
                .map(|(name, attribute, direction)| MappingEntry {
                    name: (*name).to_string(),
                    attribute: *attribute,
                    direction: *direction,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lookup {
    Mapped(AttributeId),
    OtherDirection,
    Unknown,
}

impl SensorMapping {
    fn lookup(&self, name: &str, direction: Option<u8>) -> Lookup {
        let mut other_direction = false;
        for e in self.sensors.iter().filter(|e| e.name == name) {
            match (e.direction, direction) {
                (None, _) => return Lookup::Mapped(e.attribute),
                (Some(d), Some(station)) if d == station => return Lookup::Mapped(e.attribute),
                (Some(1), None) => return Lookup::Mapped(e.attribute),
                _ => other_direction = true,
            }
        }
        if other_direction {
            return Lookup::OtherDirection;
        }
        match name.parse::<AttributeId>() {
            Ok(a) => Lookup::Mapped(a),
            Err(_) => Lookup::Unknown,
        }
    }

    /// Whether the name is known to the mapping in any direction.
    pub fn knows(&self, name: &str) -> bool {
        self.lookup(name, None) != Lookup::Unknown || self.sensors.iter().any(|e| e.name == name)
    }

    /// Replaces or adds entries from `other`.
    pub fn merge(&mut self, other: &SensorMapping) {
        for e in &other.sensors {
            self.sensors.retain(|x| !(x.name == e.name && x.direction == e.direction));
            self.sensors.push(e.clone());
        }
    }
}

/// Coarse precipitation as reported, including the no-precipitation code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseObservation {
    #[serde(rename = "none")]
    NoPrecipitation,
    WeakRain,
    ModerateRain,
    AbundantRain,
    SleetOrSnow,
}

impl CoarseObservation {
    pub fn class(self) -> Option<CoarsePrecipitation> {
        match self {
            CoarseObservation::NoPrecipitation => None,
            CoarseObservation::WeakRain => Some(CoarsePrecipitation::WeakRain),
            CoarseObservation::ModerateRain => Some(CoarsePrecipitation::ModerateRain),
            CoarseObservation::AbundantRain => Some(CoarsePrecipitation::AbundantRain),
            CoarseObservation::SleetOrSnow => Some(CoarsePrecipitation::SleetOrSnow),
        }
    }

    pub fn weight(self) -> UnitWeight {
        self.class().map_or(UnitWeight::ZERO, CoarsePrecipitation::weight)
    }
}

/// Numeric feed codes for the categorical attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeTables {
    #[serde(default = "one")]
    pub version: u32,
    #[serde(default)]
    pub surface_state: BTreeMap<i64, SurfaceState>,
    #[serde(default)]
    pub precipitation_type: BTreeMap<i64, PrecipitationType>,
    #[serde(default)]
    pub coarse_precipitation: BTreeMap<i64, CoarseObservation>,
}

impl Default for CodeTables {
    fn default() -> Self {
        use PrecipitationType as P;
        use SurfaceState as S;
        let surface_state = [
            (1, S::Dry),
            (2, S::Moist),
            (3, S::Wet),
            (4, S::MoistSalty),
            (5, S::WetSalted),
            (6, S::Frost),
            (7, S::Ice),
            (8, S::Snow),
            (9, S::Slush),
        ];
        let precipitation_type = [
            (0, P::DryWeather),
            (1, P::WeakUndetermined),
            (2, P::Drizzle),
            (3, P::Rain),
            (4, P::WetSleet),
            (5, P::Sleet),
            (6, P::Hail),
            (7, P::FreezingDrizzle),
            (8, P::Snow),
            (9, P::FreezingRain),
            // Ice crystals, snow grains and snow pellets.
            (10, P::Snow),
            (11, P::Snow),
            (12, P::Snow),
        ];
        let coarse_precipitation = [
            (0, CoarseObservation::NoPrecipitation),
            (1, CoarseObservation::WeakRain),
            (2, CoarseObservation::ModerateRain),
            (3, CoarseObservation::AbundantRain),
            (4, CoarseObservation::SleetOrSnow),
            (5, CoarseObservation::SleetOrSnow),
            (6, CoarseObservation::SleetOrSnow),
        ];
        CodeTables {
            version: 1,
            surface_state: surface_state.into_iter().collect(),
            precipitation_type: precipitation_type.into_iter().collect(),
            coarse_precipitation: coarse_precipitation.into_iter().collect(),
        }
    }
}

impl CodeTables {
    pub fn merge(&mut self, other: &CodeTables) {
        self.surface_state.extend(other.surface_state.iter().map(|(k, v)| (*k, *v)));
        self.precipitation_type.extend(other.precipitation_type.iter().map(|(k, v)| (*k, *v)));
        self.coarse_precipitation.extend(other.coarse_precipitation.iter().map(|(k, v)| (*k, *v)));
    }

    fn code_of<T: PartialEq + Copy>(table: &BTreeMap<i64, T>, value: T) -> Option<i64> {
        table.iter().find(|(_, v)| **v == value).map(|(k, _)| *k)
    }
}

/// One value per canonical attribute, derived from a station's readings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CanonicalAttributes {
    pub values: BTreeMap<AttributeId, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface_state: Option<SurfaceState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precipitation_type: Option<PrecipitationType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarse_precipitation: Option<CoarseObservation>,
}

impl CanonicalAttributes {
    pub fn get(&self, id: AttributeId) -> Option<f64> {
        self.values.get(&id).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
            && self.surface_state.is_none()
            && self.precipitation_type.is_none()
            && self.coarse_precipitation.is_none()
    }

    /// Re-expresses the attributes as readings named by canonical id, with
    /// categorical values encoded through `codes`.
    pub fn to_readings(&self, codes: &CodeTables, at: chrono::DateTime<chrono::Utc>) -> Vec<SensorReading> {
        let mut out: Vec<SensorReading> = Vec::new();
        let mut push = |name: &str, value: f64| {
            out.push(SensorReading {
                sensor_id: out.len() as u32 + 1,
                name: name.to_string(),
                value,
                unit: None,
                measured_at: at,
            })
        };
        for (id, v) in &self.values {
            push(id.as_str(), *v);
        }
        if let Some(code) = self.surface_state.and_then(|s| CodeTables::code_of(&codes.surface_state, s)) {
            push(AttributeId::SurfaceState.as_str(), code as f64);
        }
        if let Some(code) = self
            .precipitation_type
            .and_then(|p| CodeTables::code_of(&codes.precipitation_type, p))
        {
            push(AttributeId::PrecipitationType.as_str(), code as f64);
        }
        if let Some(code) = self
            .coarse_precipitation
            .and_then(|c| CodeTables::code_of(&codes.coarse_precipitation, c))
        {
            push(AttributeId::CoarsePrecipitation.as_str(), code as f64);
        }
        out
    }
}

fn code_key(value: f64) -> Option<i64> {
    (value.is_finite() && value.fract() == 0.0).then_some(value as i64)
}

/// Collapses raw readings into canonical attributes.
///
/// Numeric duplicates are averaged; duplicate categorical readings resolve
/// to the most severe state. `direction` selects which direction-specific
/// traffic sensors apply (`None` accepts direction 1 and undirected names).
pub fn canonicalize(
    readings: &[SensorReading],
    mapping: &SensorMapping,
    codes: &CodeTables,
    direction: Option<u8>,
) -> CanonicalAttributes {
    let mut numeric: BTreeMap<AttributeId, Vec<f64>> = BTreeMap::new();
    let mut out = CanonicalAttributes::default();

    for r in readings {
        let id = match mapping.lookup(&r.name, direction) {
            Lookup::Mapped(id) => id,
            Lookup::OtherDirection => continue,
            Lookup::Unknown => {
                debug!(sensor = %r.name, "dropping unmapped sensor");
                continue;
            }
        };
        if !r.value.is_finite() {
            debug!(sensor = %r.name, "dropping non-finite reading");
            continue;
        }
        if !id.is_categorical() {
            numeric.entry(id).or_default().push(r.value);
            continue;
        }
        let Some(code) = code_key(r.value) else {
            debug!(sensor = %r.name, value = r.value, "dropping non-integer category code");
            continue;
        };
        let unknown_code = || debug!(sensor = %r.name, code, "dropping unknown category code");
        match id {
            AttributeId::SurfaceState => match codes.surface_state.get(&code) {
                Some(s) => out.surface_state = out.surface_state.max(Some(*s)),
                None => unknown_code(),
            },
            AttributeId::PrecipitationType => match codes.precipitation_type.get(&code) {
                Some(p) => out.precipitation_type = out.precipitation_type.max(Some(*p)),
                None => unknown_code(),
            },
            AttributeId::CoarsePrecipitation => match codes.coarse_precipitation.get(&code) {
                Some(c) => out.coarse_precipitation = out.coarse_precipitation.max(Some(*c)),
                None => unknown_code(),
            },
            _ => unreachable!("numeric attributes handled above"),
        }
    }

    for (id, mut vs) in numeric {
        // Sorting makes the sum independent of reading order.
        vs.sort_by(f64::total_cmp);
        let mean = vs.iter().sum::<f64>() / vs.len() as f64;
        out.values.insert(id, mean);
    }
    out
}

/// Precipitation after applying the detailed-then-coarse fallback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "value")]
pub enum Precipitation {
    Detailed(PrecipitationType),
    Coarse(CoarseObservation),
}

impl Precipitation {
    pub fn weight(self) -> UnitWeight {
        match self {
            Precipitation::Detailed(p) => p.weight(),
            Precipitation::Coarse(c) => c.weight(),
        }
    }
}

pub fn resolve_precipitation(attrs: &CanonicalAttributes) -> Option<Precipitation> {
    attrs
        .precipitation_type
        .map(Precipitation::Detailed)
        .or(attrs.coarse_precipitation.map(Precipitation::Coarse))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointContext {
    Surface,
    Air,
}

/// Dew point difference above freezing, frost point difference at or below
/// it (falling back to the dew point when frost is missing). Without a
/// reference temperature the dew point is preferred.
pub fn resolve_point_difference(
    attrs: &CanonicalAttributes,
    context: PointContext,
    reference_temp: Option<f64>,
) -> Option<f64> {
    let (dew, frost) = match context {
        PointContext::Surface => (
            attrs.get(AttributeId::SurfaceDewPointDiff),
            attrs.get(AttributeId::SurfaceFrostPointDiff),
        ),
        PointContext::Air => (attrs.get(AttributeId::AirDewPointDiff), attrs.get(AttributeId::AirFrostPointDiff)),
    };
    match reference_temp {
        Some(t) if t.is_finite() && t <= 0.0 => frost.or(dew),
        _ => dew.or(frost),
    }
}

/// Surface temperature minus the freezing point.
pub fn freezing_point_delta(surface_temp: f64, freezing_point: f64) -> Result<f64, WeightError> {
    for v in [surface_temp, freezing_point] {
        if !v.is_finite() {
            return Err(WeightError::NonFinite(v));
        }
    }
    Ok(surface_temp - freezing_point)
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;

    use super::*;

    fn reading(name: &str, value: f64) -> SensorReading {
        SensorReading {
            sensor_id: 1,
            name: name.into(),
            value,
            unit: None,
            measured_at: chrono::Utc.with_ymd_and_hms(2024, 5, 10, 12, 0, 0).unwrap(),
        }
    }

    fn canon(rs: &[SensorReading]) -> CanonicalAttributes {
        canonicalize(rs, &SensorMapping::default(), &CodeTables::default(), None)
    }

    #[test]
    fn duplicates_are_averaged() {
        let a = canon(&[reading("TIE_1", 1.0), reading("TIE_3", 2.0)]);
        assert_eq!(a.get(AttributeId::RoadTemperature), Some(1.5));
        let b = canon(&[reading("TIE_2", -3.0)]);
        assert_eq!(b.get(AttributeId::RoadTemperature), Some(-3.0));
        assert!(canon(&[]).is_empty());
    }

    #[test]
    fn unmapped_names_are_dropped() {
        let a = canon(&[reading("XYZZY", 4.0), reading("ILMA", 10.0)]);
        assert_eq!(a.values.len(), 1);
        assert_eq!(a.get(AttributeId::AirTemperature), Some(10.0));
    }

    #[test]
    fn codes_translate_and_worst_state_wins() {
        let a = canon(&[reading("KELI_1", 3.0), reading("KELI_2", 7.0), reading("SADE", 4.0)]);
        assert_eq!(a.surface_state, Some(SurfaceState::Ice));
        assert_eq!(a.coarse_precipitation, Some(CoarseObservation::SleetOrSnow));
        let b = canon(&[reading("SATEEN_OLOMUOTO_PWDXX", 11.0), reading("KELI_1", 42.0)]);
        assert_eq!(b.precipitation_type, Some(PrecipitationType::Snow));
        assert_eq!(b.surface_state, None);
    }

    #[test]
    fn direction_selects_traffic_sensors() {
        let rs = [
            reading("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA1_VVAPAAS1", 90.0),
            reading("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA2_VVAPAAS2", 40.0),
        ];
        let m = SensorMapping::default();
        let c = CodeTables::default();
        assert_eq!(canonicalize(&rs, &m, &c, Some(1)).get(AttributeId::FfsPercent), Some(90.0));
        assert_eq!(canonicalize(&rs, &m, &c, Some(2)).get(AttributeId::FfsPercent), Some(40.0));
    }

    #[test]
    fn precipitation_fallback() {
        let mut a = CanonicalAttributes {
            precipitation_type: Some(PrecipitationType::Snow),
            coarse_precipitation: Some(CoarseObservation::SleetOrSnow),
            ..Default::default()
        };
        assert_eq!(resolve_precipitation(&a), Some(Precipitation::Detailed(PrecipitationType::Snow)));
        a.precipitation_type = None;
        assert_eq!(resolve_precipitation(&a), Some(Precipitation::Coarse(CoarseObservation::SleetOrSnow)));
        a.coarse_precipitation = None;
        assert_eq!(resolve_precipitation(&a), None);
    }

    #[test]
    fn point_difference_selection() {
        let mut a = CanonicalAttributes::default();
        a.values.insert(AttributeId::SurfaceDewPointDiff, 3.0);
        a.values.insert(AttributeId::SurfaceFrostPointDiff, 4.0);
        assert_eq!(resolve_point_difference(&a, PointContext::Surface, Some(5.0)), Some(3.0));

        let mut b = CanonicalAttributes::default();
        b.values.insert(AttributeId::AirDewPointDiff, 2.0);
        b.values.insert(AttributeId::AirFrostPointDiff, 1.0);
        assert_eq!(resolve_point_difference(&b, PointContext::Air, Some(-5.0)), Some(1.0));
        b.values.remove(&AttributeId::AirFrostPointDiff);
        assert_eq!(resolve_point_difference(&b, PointContext::Air, Some(-5.0)), Some(2.0));
        assert_eq!(resolve_point_difference(&b, PointContext::Surface, Some(-5.0)), None);
    }

    #[test]
    fn freezing_delta() {
        assert_eq!(freezing_point_delta(1.0, -0.5).unwrap(), 1.5);
        assert_eq!(freezing_point_delta(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(freezing_point_delta(-2.0, -1.0).unwrap(), -1.0);
        assert!(freezing_point_delta(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn canonical_names_are_identity_mapped() {
        let m = SensorMapping::default();
        assert!(m.knows("road_temperature"));
        assert!(m.knows("KESKINOPEUS_5MIN_LIUKUVA_SUUNTA2"));
        assert!(!m.knows("XYZZY"));
    }
}
