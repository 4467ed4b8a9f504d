//! WGS84 coordinates and great-circle helpers.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Mean earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Geographic position in degrees. Stored as (lat, lon); GeoJSON files use
/// (lon, lat) order and are converted at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub lat: f64,
    pub lon: f64,
}

impl Coord {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Coord { lat, lon }
    }

    pub fn checked(lat: f64, lon: f64) -> Result<Self, GraphError> {
        let c = Coord { lat, lon };
        if c.is_valid() {
            Ok(c)
        } else {
            Err(GraphError::BadCoordinates { lat, lon })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }

    /// `[lon, lat]` as written in GeoJSON.
    pub fn to_lon_lat(self) -> [f64; 2] {
        [self.lon, self.lat]
    }

    pub fn from_lon_lat(p: [f64; 2]) -> Self {
        Coord { lat: p[1], lon: p[0] }
    }
}

/// Haversine distance in meters.
pub fn haversine_m(a: Coord, b: Coord) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Sum of great-circle distances between consecutive points.
pub fn polyline_length(geometry: &[Coord]) -> Result<f64, GraphError> {
    if geometry.len() < 2 {
        return Err(GraphError::TooFewPoints(geometry.len()));
    }
    Ok(geometry.windows(2).map(|w| haversine_m(w[0], w[1])).sum())
}

/// Local equirectangular frame centred on `origin`, in meters. Accurate to
/// well under a meter over the few-kilometre spans it is used for.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalFrame {
    origin: Coord,
    m_per_deg_lat: f64,
    m_per_deg_lon: f64,
}

impl LocalFrame {
    pub(crate) fn new(origin: Coord) -> Self {
        let m_per_deg_lat = EARTH_RADIUS_M.to_radians();
        LocalFrame {
            origin,
            m_per_deg_lat,
            m_per_deg_lon: m_per_deg_lat * origin.lat.to_radians().cos(),
        }
    }

    pub(crate) fn project(&self, c: Coord) -> (f64, f64) {
        (
            (c.lon - self.origin.lon) * self.m_per_deg_lon,
            (c.lat - self.origin.lat) * self.m_per_deg_lat,
        )
    }
}

/// Distance from `p` to the segment `a`-`b` in meters, with the projection
/// parameter `t` in `[0, 1]` along the segment.
pub(crate) fn point_segment_distance(p: Coord, a: Coord, b: Coord) -> (f64, f64) {
    let frame = LocalFrame::new(p);
    let (ax, ay) = frame.project(a);
    let (bx, by) = frame.project(b);
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((-ax) * dx + (-ay) * dy) / len2
    }
    .clamp(0.0, 1.0);
    let (cx, cy) = (ax + t * dx, ay + t * dy);
    ((cx * cx + cy * cy).sqrt(), t)
}

/// Shortest distance from `p` to a polyline, in meters.
pub(crate) fn point_polyline_distance(p: Coord, line: &[Coord]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [only] => haversine_m(p, *only),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]).0)
            .fold(f64::INFINITY, f64::min),
    }
}

/// Point halfway along the polyline by great-circle length.
pub fn polyline_midpoint(geometry: &[Coord]) -> Option<Coord> {
    let total: f64 = geometry.windows(2).map(|w| haversine_m(w[0], w[1])).sum();
    let first = *geometry.first()?;
    if total == 0.0 {
        return Some(first);
    }
    let half = total / 2.0;
    let mut acc = 0.0;
    for w in geometry.windows(2) {
        let d = haversine_m(w[0], w[1]);
        if acc + d >= half && d > 0.0 {
            let t = (half - acc) / d;
            return Some(Coord::new(
                w[0].lat + t * (w[1].lat - w[0].lat),
                w[0].lon + t * (w[1].lon - w[0].lon),
            ));
        }
        acc += d;
    }
    geometry.last().copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_along_equator() {
        let d = polyline_length(&[Coord::new(0.0, 0.0), Coord::new(0.0, 1.0)]).unwrap();
        // R * pi / 180, evaluated independently.
        let expected = 6_371_008.8 * std::f64::consts::PI / 180.0;
        assert!((d - expected).abs() < 1e-6);
        // 111194.9 m is the figure for a 6371000 m sphere; the mean radius
        // used here gives 111195.08 m.
        assert!((d - 111_195.08).abs() < 0.01);
    }

    #[test]
    fn repeated_point_adds_nothing() {
        let a = Coord::new(65.0, 25.5);
        let b = Coord::new(65.1, 25.4);
        let with_dup = polyline_length(&[a, a, b]).unwrap();
        let without = polyline_length(&[a, b]).unwrap();
        assert_eq!(with_dup, without);
    }

    #[test]
    fn lengths_add_over_concatenation() {
        let p = [Coord::new(65.0, 25.5), Coord::new(65.05, 25.45), Coord::new(65.1, 25.4)];
        let whole = polyline_length(&p).unwrap();
        let parts = polyline_length(&p[..2]).unwrap() + polyline_length(&p[1..]).unwrap();
        assert!((whole - parts).abs() <= 1e-9 * whole);
    }

    #[test]
    fn too_few_points() {
        assert_eq!(polyline_length(&[Coord::new(0.0, 0.0)]), Err(GraphError::TooFewPoints(1)));
    }

    #[test]
    fn point_to_segment() {
        let a = Coord::new(65.0, 25.0);
        let b = Coord::new(65.0, 25.1);
        let on = Coord::new(65.0, 25.05);
        let (d, t) = point_segment_distance(on, a, b);
        assert!(d < 1e-6);
        assert!((t - 0.5).abs() < 1e-9);
        let off = Coord::new(65.001, 25.05);
        let (d, _) = point_segment_distance(off, a, b);
        assert!((d - haversine_m(off, on)).abs() < 0.01);
    }

    #[test]
    fn midpoint_of_straight_line() {
        let m = polyline_midpoint(&[Coord::new(0.0, 0.0), Coord::new(0.0, 2.0)]).unwrap();
        assert!((m.lon - 1.0).abs() < 1e-9);
    }
}
