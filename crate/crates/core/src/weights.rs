//! Mapping of individual sensor attributes onto unit weights.
//!
//! Every function here is pure. Numeric attributes use a [`LinearScale`]
//! between the value that maps to 0 and the value that maps to 1, clamped
//! outside that range. Categorical attributes use fixed rank tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::WeightError;

/// A dimensionless weight in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize)]
#[serde(transparent)]
pub struct UnitWeight(f64);

impl UnitWeight {
    pub const ZERO: UnitWeight = UnitWeight(0.0);
    pub const ONE: UnitWeight = UnitWeight(1.0);

    pub fn new(value: f64) -> Result<Self, WeightError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(UnitWeight(value))
        } else {
            Err(WeightError::OutOfRange(value))
        }
    }

    /// Clamps any finite value into `[0, 1]`. NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            UnitWeight(0.0)
        } else {
            UnitWeight(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for UnitWeight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        UnitWeight::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for UnitWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn finite(value: f64) -> Result<f64, WeightError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(WeightError::NonFinite(value))
    }
}

/// Linear mapping with `v_zero -> 0` and `v_one -> 1`. The direction may be
/// either increasing or decreasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearScale {
    pub v_zero: f64,
    pub v_one: f64,
}

impl LinearScale {
    pub fn new(v_zero: f64, v_one: f64) -> Result<Self, WeightError> {
        finite(v_zero)?;
        finite(v_one)?;
        if v_zero == v_one {
            return Err(WeightError::DegenerateScale(v_zero));
        }
        Ok(LinearScale { v_zero, v_one })
    }

    pub fn weight(&self, value: f64) -> Result<UnitWeight, WeightError> {
        linear_scale_weight(value, self)
    }
}

pub fn linear_scale_weight(value: f64, scale: &LinearScale) -> Result<UnitWeight, WeightError> {
    let value = finite(value)?;
    if scale.v_zero == scale.v_one {
        return Err(WeightError::DegenerateScale(scale.v_zero));
    }
    // Exact endpoints, independent of rounding in the division below.
    if value == scale.v_zero {
        return Ok(UnitWeight::ZERO);
    }
    if value == scale.v_one {
        return Ok(UnitWeight::ONE);
    }
    let t = (value - scale.v_zero) / (scale.v_one - scale.v_zero);
    Ok(UnitWeight::saturating(t))
}

/// Keys of the linear scale registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleKey {
    Friction,
    Moisture,
    SnowDepth,
    /// Shared by the freezing, dew and frost point differences.
    TempPointDiff,
    VisibleDistance,
    RelativeHumidity,
    PrecipitationIntensity,
    AverageWind,
    MaximumWind,
    FfsPercent,
    OccupancyPercent,
}

impl ScaleKey {
    pub const ALL: [ScaleKey; 11] = [
        ScaleKey::Friction,
        ScaleKey::Moisture,
        ScaleKey::SnowDepth,
        ScaleKey::TempPointDiff,
        ScaleKey::VisibleDistance,
        ScaleKey::RelativeHumidity,
        ScaleKey::PrecipitationIntensity,
        ScaleKey::AverageWind,
        ScaleKey::MaximumWind,
        ScaleKey::FfsPercent,
        ScaleKey::OccupancyPercent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScaleKey::Friction => "friction",
            ScaleKey::Moisture => "moisture",
            ScaleKey::SnowDepth => "snow_depth",
            ScaleKey::TempPointDiff => "temp_point_diff",
            ScaleKey::VisibleDistance => "visible_distance",
            ScaleKey::RelativeHumidity => "relative_humidity",
            ScaleKey::PrecipitationIntensity => "precipitation_intensity",
            ScaleKey::AverageWind => "average_wind",
            ScaleKey::MaximumWind => "maximum_wind",
            ScaleKey::FfsPercent => "ffs_percent",
            ScaleKey::OccupancyPercent => "occupancy_percent",
        }
    }

    /// Compiled-in endpoints.
    pub fn default_scale(self) -> LinearScale {
        let (v_zero, v_one) = match self {
            ScaleKey::Friction => (0.82, 0.09),
            ScaleKey::Moisture => (0.0, 7.0),
            ScaleKey::SnowDepth => (0.0, 10.0),
            ScaleKey::TempPointDiff => (5.0, 0.0),
            ScaleKey::VisibleDistance => (10_000.0, 0.0),
            ScaleKey::RelativeHumidity => (0.0, 100.0),
            ScaleKey::PrecipitationIntensity => (0.0, 10.0),
            ScaleKey::AverageWind => (0.0, 21.0),
            ScaleKey::MaximumWind => (0.0, 31.5),
            ScaleKey::FfsPercent => (100.0, 0.0),
            ScaleKey::OccupancyPercent => (0.0, 100.0),
        };
        LinearScale { v_zero, v_one }
    }
}

impl fmt::Display for ScaleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScaleKey {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScaleKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| WeightError::UnknownAttribute(s.to_string()))
    }
}

/// Registry of linear scales, keyed by attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScaleRegistry {
    scales: BTreeMap<ScaleKey, LinearScale>,
}

impl Default for ScaleRegistry {
    fn default() -> Self {
        ScaleRegistry {
            scales: ScaleKey::ALL.into_iter().map(|k| (k, k.default_scale())).collect(),
        }
    }
}

impl ScaleRegistry {
    pub fn empty() -> Self {
        ScaleRegistry { scales: BTreeMap::new() }
    }

    pub fn insert(&mut self, key: ScaleKey, scale: LinearScale) -> Result<(), WeightError> {
        let scale = LinearScale::new(scale.v_zero, scale.v_one)?;
        self.scales.insert(key, scale);
        Ok(())
    }

    pub fn get(&self, key: ScaleKey) -> Option<&LinearScale> {
        self.scales.get(&key)
    }

    pub fn weight(&self, key: ScaleKey, value: f64) -> Result<UnitWeight, WeightError> {
        let scale = self
            .scales
            .get(&key)
            .ok_or_else(|| WeightError::UnknownAttribute(key.to_string()))?;
        linear_scale_weight(value, scale)
    }

    /// String-keyed dispatch, as used by configuration and the API.
    pub fn attribute_scale_weight(&self, attribute_id: &str, value: f64) -> Result<UnitWeight, WeightError> {
        self.weight(attribute_id.parse()?, value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ScaleKey, &LinearScale)> {
        self.scales.iter().map(|(k, v)| (*k, v))
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &ScaleRegistry) -> Result<(), WeightError> {
        for (k, s) in other.iter() {
            self.insert(k, *s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceState {
    Dry,
    Moist,
    Wet,
    MoistSalty,
    WetSalted,
    Frost,
    Ice,
    Snow,
    Slush,
}

impl SurfaceState {
    pub const ALL: [SurfaceState; 9] = [
        SurfaceState::Dry,
        SurfaceState::Moist,
        SurfaceState::Wet,
        SurfaceState::MoistSalty,
        SurfaceState::WetSalted,
        SurfaceState::Frost,
        SurfaceState::Ice,
        SurfaceState::Snow,
        SurfaceState::Slush,
    ];

    pub fn weight(self) -> UnitWeight {
        surface_state_weight(self)
    }
}

pub fn surface_state_weight(state: SurfaceState) -> UnitWeight {
    UnitWeight(match state {
        SurfaceState::Dry => 0.0,
        SurfaceState::Moist => 0.125,
        SurfaceState::Wet => 0.25,
        SurfaceState::MoistSalty => 0.375,
        SurfaceState::WetSalted => 0.5,
        SurfaceState::Frost => 0.625,
        SurfaceState::Ice => 0.75,
        SurfaceState::Snow => 0.875,
        SurfaceState::Slush => 1.0,
    })
}

/// Detailed precipitation type. Ice crystals, snow grains and snow pellets
/// are reported as [`PrecipitationType::Snow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecipitationType {
    DryWeather,
    WeakUndetermined,
    Drizzle,
    Rain,
    WetSleet,
    Sleet,
    Hail,
    FreezingDrizzle,
    Snow,
    FreezingRain,
}

impl PrecipitationType {
    pub const ALL: [PrecipitationType; 10] = [
        PrecipitationType::DryWeather,
        PrecipitationType::WeakUndetermined,
        PrecipitationType::Drizzle,
        PrecipitationType::Rain,
        PrecipitationType::WetSleet,
        PrecipitationType::Sleet,
        PrecipitationType::Hail,
        PrecipitationType::FreezingDrizzle,
        PrecipitationType::Snow,
        PrecipitationType::FreezingRain,
    ];

    pub fn weight(self) -> UnitWeight {
        precipitation_type_weight(self)
    }
}

pub fn precipitation_type_weight(p: PrecipitationType) -> UnitWeight {
    UnitWeight(match p {
        PrecipitationType::DryWeather => 0.0,
        PrecipitationType::WeakUndetermined => 0.111,
        PrecipitationType::Drizzle => 0.222,
        PrecipitationType::Rain => 0.333,
        PrecipitationType::WetSleet => 0.444,
        PrecipitationType::Sleet => 0.556,
        PrecipitationType::Hail => 0.667,
        PrecipitationType::FreezingDrizzle => 0.778,
        PrecipitationType::Snow => 0.889,
        PrecipitationType::FreezingRain => 1.0,
    })
}

/// Rain / sleet-or-snow classification, used when the detailed type is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarsePrecipitation {
    WeakRain,
    ModerateRain,
    AbundantRain,
    SleetOrSnow,
}

impl CoarsePrecipitation {
    pub const ALL: [CoarsePrecipitation; 4] = [
        CoarsePrecipitation::WeakRain,
        CoarsePrecipitation::ModerateRain,
        CoarsePrecipitation::AbundantRain,
        CoarsePrecipitation::SleetOrSnow,
    ];

    pub fn weight(self) -> UnitWeight {
        coarse_precipitation_weight(self)
    }
}

pub fn coarse_precipitation_weight(p: CoarsePrecipitation) -> UnitWeight {
    UnitWeight(match p {
        CoarsePrecipitation::WeakRain => 0.222,
        CoarsePrecipitation::ModerateRain | CoarsePrecipitation::AbundantRain => 0.333,
        // Stored as the literal 0.722, not (0.556 + 0.889) / 2.
        CoarsePrecipitation::SleetOrSnow => 0.722,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoadWorkSeverity {
    #[default]
    None,
    Low,
    High,
    Highest,
}

impl RoadWorkSeverity {
    pub const ALL: [RoadWorkSeverity; 4] = [
        RoadWorkSeverity::None,
        RoadWorkSeverity::Low,
        RoadWorkSeverity::High,
        RoadWorkSeverity::Highest,
    ];

    pub fn weight(self) -> UnitWeight {
        road_work_weight(self)
    }
}

pub fn road_work_weight(s: RoadWorkSeverity) -> UnitWeight {
    UnitWeight(match s {
        RoadWorkSeverity::None => 0.0,
        RoadWorkSeverity::Low => 0.33,
        RoadWorkSeverity::High => 0.66,
        RoadWorkSeverity::Highest => 1.0,
    })
}

pub fn accident_weight(active: bool) -> UnitWeight {
    if active {
        UnitWeight::ONE
    } else {
        UnitWeight::ZERO
    }
}

const ROAD_TEMP_PEAK: f64 = -2.0;
const ROAD_TEMP_WARM_ZERO: f64 = 5.0;
const ROAD_TEMP_COLD_ZERO: f64 = -20.0;

/// Road surface temperature. Peaks at -2 °C, falls to zero at +5 °C and
/// at -20 °C.
pub fn road_temperature_weight(t: f64) -> Result<UnitWeight, WeightError> {
    let t = finite(t)?;
    let w = if t >= ROAD_TEMP_WARM_ZERO || t <= ROAD_TEMP_COLD_ZERO {
        0.0
    } else if t == ROAD_TEMP_PEAK {
        1.0
    } else if t > ROAD_TEMP_PEAK {
        (ROAD_TEMP_WARM_ZERO - t) / (ROAD_TEMP_WARM_ZERO - ROAD_TEMP_PEAK)
    } else {
        (t - ROAD_TEMP_COLD_ZERO) / (ROAD_TEMP_PEAK - ROAD_TEMP_COLD_ZERO)
    };
    Ok(UnitWeight::saturating(w))
}

const AIR_TEMP_OPTIMUM: f64 = 14.0;
const AIR_TEMP_HOT: f64 = 27.0;
const AIR_TEMP_COLD: f64 = -30.0;

/// Air temperature. Zero at 14 °C, one at or beyond -30 °C and +27 °C.
pub fn air_temperature_weight(t: f64) -> Result<UnitWeight, WeightError> {
    let t = finite(t)?;
    let w = if t == AIR_TEMP_OPTIMUM {
        0.0
    } else if t > AIR_TEMP_OPTIMUM {
        (t - AIR_TEMP_OPTIMUM) / (AIR_TEMP_HOT - AIR_TEMP_OPTIMUM)
    } else {
        (AIR_TEMP_OPTIMUM - t) / (AIR_TEMP_OPTIMUM - AIR_TEMP_COLD)
    };
    Ok(UnitWeight::saturating(w))
}
