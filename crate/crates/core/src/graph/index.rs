use std::collections::{BTreeSet, HashMap};

use crate::geo::{Coord, EARTH_RADIUS_M};

/// Uniform lat/lon grid bucketing point indices.
pub(crate) struct GridIndex {
    cell_deg: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl GridIndex {
    pub(crate) fn new(points: impl IntoIterator<Item = Coord>, cell_deg: f64) -> Self {
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.into_iter().enumerate() {
            cells.entry(Self::key(p, cell_deg)).or_default().push(i);
        }
        GridIndex { cell_deg, cells }
    }

    fn key(p: Coord, cell_deg: f64) -> (i64, i64) {
        ((p.lat / cell_deg).floor() as i64, (p.lon / cell_deg).floor() as i64)
    }

    /// Indices of points possibly within `radius_m` of the box spanned by
    /// `a` and `b`.
    pub(crate) fn near_box(&self, a: Coord, b: Coord, radius_m: f64) -> BTreeSet<usize> {
        let dlat = (radius_m / EARTH_RADIUS_M).to_degrees();
        let max_abs_lat = a.lat.abs().max(b.lat.abs()) + dlat;
        let cos = max_abs_lat.min(89.0).to_radians().cos();
        let dlon = dlat / cos;
        let lo = Coord::new(a.lat.min(b.lat) - dlat, a.lon.min(b.lon) - dlon);
        let hi = Coord::new(a.lat.max(b.lat) + dlat, a.lon.max(b.lon) + dlon);
        let (r0, c0) = Self::key(lo, self.cell_deg);
        let (r1, c1) = Self::key(hi, self.cell_deg);
        let mut out = BTreeSet::new();
        // Large boxes scan the occupied cells instead of the box.
        if (r1 - r0 + 1).saturating_mul(c1 - c0 + 1) > self.cells.len() as i64 {
            for ((r, c), v) in &self.cells {
                if (r0..=r1).contains(r) && (c0..=c1).contains(c) {
                    out.extend(v.iter().copied());
                }
            }
            return out;
        }
        for r in r0..=r1 {
            for c in c0..=c1 {
                if let Some(v) = self.cells.get(&(r, c)) {
                    out.extend(v.iter().copied());
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_points_near_box() {
        let pts = [Coord::new(65.0, 25.0), Coord::new(65.5, 25.5), Coord::new(60.0, 20.0)];
        let g = GridIndex::new(pts, 0.01);
        let hits = g.near_box(Coord::new(64.99, 24.99), Coord::new(65.01, 25.01), 10.0);
        assert_eq!(hits.into_iter().collect::<Vec<_>>(), vec![0]);
        let hits = g.near_box(Coord::new(65.0, 25.0), Coord::new(65.0, 25.0), 100_000.0);
        assert!(hits.contains(&1) && !hits.contains(&2));
    }
}
