//! Request types shared by the HTTP service, its client and the CLI.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, RouteError};
use crate::fusion::LengthMode;
use crate::geo::Coord;
use crate::router::{preset, PreferenceVector, Profile};

/// A preset name or an inline profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileRef {
    Preset(String),
    Inline(Profile),
}

impl ProfileRef {
    pub fn preference(&self) -> Result<PreferenceVector, Error> {
        match self {
            ProfileRef::Preset(name) => preset(name)
                .ok_or_else(|| Error::InvalidRequest(format!("unknown profile preset `{name}`")))?
                .preference()
                .map_err(Error::from),
            ProfileRef::Inline(p) => Ok(p.preference()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRequest {
    pub scenario: String,
    pub from: Coord,
    pub to: Coord,
    pub profile: ProfileRef,
    #[serde(default)]
    pub length_mode: LengthMode,
}

/// One problem with one request field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    fn new(field: &str, message: impl Into<String>) -> Self {
        FieldError { field: field.into(), message: message.into() }
    }
}

/// Parses `"lat,lon"`.
pub fn parse_lat_lon(s: &str) -> Result<Coord, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `lat,lon`, got `{s}`"))?;
    let lat: f64 = a.trim().parse().map_err(|_| format!("bad latitude `{}`", a.trim()))?;
    let lon: f64 = b.trim().parse().map_err(|_| format!("bad longitude `{}`", b.trim()))?;
    Coord::checked(lat, lon).map_err(|e| e.to_string())
}

fn coord_field(obj: &Map<String, Value>, field: &str, errors: &mut Vec<FieldError>) -> Option<Coord> {
    let parsed = match obj.get(field) {
        None => Err("required".to_string()),
        Some(Value::String(s)) => parse_lat_lon(s),
        Some(Value::Object(o)) => match (o.get("lat").and_then(Value::as_f64), o.get("lon").and_then(Value::as_f64)) {
            (Some(lat), Some(lon)) if o.len() == 2 => Coord::checked(lat, lon).map_err(|e| e.to_string()),
            _ => Err("expected {\"lat\": number, \"lon\": number}".to_string()),
        },
        Some(_) => Err("expected {\"lat\", \"lon\"} object or \"lat,lon\" string".to_string()),
    };
    parsed.map_err(|m| errors.push(FieldError::new(field, m))).ok()
}

fn profile_field(obj: &Map<String, Value>, errors: &mut Vec<FieldError>) -> Option<ProfileRef> {
    let v = match obj.get("profile") {
        None => {
            errors.push(FieldError::new("profile", "required"));
            return None;
        }
        Some(v) => v,
    };
    match v {
        Value::String(name) => match preset(name) {
            Some(_) => Some(ProfileRef::Preset(name.clone())),
            None => {
                errors.push(FieldError::new("profile", format!("unknown preset `{name}`")));
                None
            }
        },
        Value::Object(_) => {
            let p: Profile = match serde_json::from_value(v.clone()) {
                Ok(p) => p,
                Err(e) => {
                    errors.push(FieldError::new("profile", e.to_string()));
                    return None;
                }
            };
            match p.preference() {
                Ok(_) => Some(ProfileRef::Inline(p)),
                Err(RouteError::InvalidPreference(m)) => {
                    let field = if m.starts_with("ratings") {
                        "profile.ratings"
                    } else if p.vector.is_some() {
                        "profile.vector"
                    } else {
                        "profile"
                    };
                    errors.push(FieldError::new(field, m));
                    None
                }
                Err(e) => {
                    errors.push(FieldError::new("profile", e.to_string()));
                    None
                }
            }
        }
        _ => {
            errors.push(FieldError::new("profile", "expected a preset name or a profile object"));
            None
        }
    }
}

/// Validates a JSON request body, collecting every field problem.
pub fn parse_route_request(body: &Value) -> Result<RouteRequest, Vec<FieldError>> {
    let Some(obj) = body.as_object() else {
        return Err(vec![FieldError::new("", "request body must be a JSON object")]);
    };
    let mut errors = Vec::new();
    for key in obj.keys() {
        if !["scenario", "from", "to", "profile", "length_mode"].contains(&key.as_str()) {
            errors.push(FieldError::new(key, "unknown field"));
        }
    }
    let scenario = match obj.get("scenario") {
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        Some(_) => {
            errors.push(FieldError::new("scenario", "expected a non-empty string"));
            None
        }
        None => {
            errors.push(FieldError::new("scenario", "required"));
            None
        }
    };
    let from = coord_field(obj, "from", &mut errors);
    let to = coord_field(obj, "to", &mut errors);
    let profile = profile_field(obj, &mut errors);
    let length_mode = match obj.get("length_mode") {
        None | Some(Value::Null) => Some(LengthMode::default()),
        Some(Value::String(s)) => s.parse().map_err(|m: String| errors.push(FieldError::new("length_mode", m))).ok(),
        Some(_) => {
            errors.push(FieldError::new("length_mode", "expected \"raw\" or \"normalized\""));
            None
        }
    };
    match (scenario, from, to, profile, length_mode) {
        (Some(scenario), Some(from), Some(to), Some(profile), Some(length_mode)) if errors.is_empty() => {
            Ok(RouteRequest { scenario, from, to, profile, length_mode })
        }
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn accepts_preset_and_inline_profiles() {
        let r = parse_route_request(&json!({
            "scenario": "base", "from": "65.0,25.0", "to": {"lat": 65.1, "lon": 25.2}, "profile": "tapio"
        }))
        .unwrap();
        assert_eq!(r.to, Coord::new(65.1, 25.2));
        assert_eq!(r.length_mode, LengthMode::RawKilometers);
        let r = parse_route_request(&json!({
            "scenario": "base", "from": "65.0,25.0", "to": "65.1,25.2",
            "profile": {"ratings": ["very", "very", "very", "very"]}, "length_mode": "normalized"
        }))
        .unwrap();
        assert_eq!(r.profile.preference().unwrap().as_array(), [0.25; 4]);
    }

    #[test]
    fn reports_every_bad_field() {
        let errs = parse_route_request(&json!({
            "from": "95,0", "to": 3, "profile": {"vector": [0.2, 0.2, 0.2, 0.2, 0.2]}, "extra": 1
        }))
        .unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(fields, vec!["extra", "scenario", "from", "to", "profile.vector"]);
        assert_eq!(parse_route_request(&json!([])).unwrap_err().len(), 1);
    }

    #[test]
    fn lat_lon_strings() {
        assert_eq!(parse_lat_lon(" 65.5 , 25.25").unwrap(), Coord::new(65.5, 25.25));
        assert!(parse_lat_lon("65.5").is_err());
        assert!(parse_lat_lon("x,1").is_err());
        assert!(parse_lat_lon("0,200").is_err());
    }
}
