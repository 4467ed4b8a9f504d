use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::index::GridIndex;
use super::{Node, NodeId, RoadSegment};
use crate::error::GraphError;
use crate::geo::{haversine_m, point_segment_distance, polyline_length, Coord, EARTH_RADIUS_M};

/// Matches the 1 m positional accuracy of the source road address data.
pub const DEFAULT_SNAP_TOLERANCE_M: f64 = 1.0;

const NODE_GRID_DEG: f64 = 0.01;

/// A road line before splitting at intersections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputPolyline {
    pub id: String,
    pub road_number: Option<u32>,
    pub geometry: Vec<Coord>,
}

#[derive(Debug, Clone, Copy)]
enum Cut {
    Vertex(usize),
    Interior { edge: usize, t: f64 },
}

/// Assigns ids to polyline endpoints that match no input node, merging
/// endpoints that lie within tolerance of each other.
struct EndpointRegistry {
    cell_deg: f64,
    tol_m: f64,
    cells: HashMap<(i64, i64), Vec<(Coord, NodeId)>>,
    next_id: u64,
}

impl EndpointRegistry {
    fn new(tol_m: f64, next_id: u64) -> Self {
        let tol_deg = (tol_m / EARTH_RADIUS_M).to_degrees();
        EndpointRegistry { cell_deg: (tol_deg * 4.0).max(1e-3), tol_m, cells: HashMap::new(), next_id }
    }

    fn key(&self, c: Coord) -> (i64, i64) {
        ((c.lat / self.cell_deg).floor() as i64, (c.lon / self.cell_deg).floor() as i64)
    }

    fn resolve(&mut self, c: Coord) -> (NodeId, Coord) {
        let (r, k) = self.key(c);
        let mut best: Option<(f64, NodeId, Coord)> = None;
        for dr in -1..=1 {
            for dk in -1..=1 {
                for (p, id) in self.cells.get(&(r + dr, k + dk)).into_iter().flatten() {
                    let d = haversine_m(*p, c);
                    if d <= self.tol_m && best.is_none_or(|(bd, bid, _)| d < bd || (d == bd && *id < bid)) {
                        best = Some((d, *id, *p));
                    }
                }
            }
        }
        if let Some((_, id, p)) = best {
            return (id, p);
        }
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.cells.entry((r, k)).or_default().push((c, id));
        (id, c)
    }
}

fn dedup(points: &[Coord]) -> Vec<Coord> {
    let mut out: Vec<Coord> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() != Some(p) {
            out.push(*p);
        }
    }
    out
}

/// Splits each polyline wherever a node lies on it, so that no segment
/// passes through an intersection.
///
/// A node within `snap_tolerance_m` of a vertex cuts the line at that
/// vertex (which takes the node's exact coordinates); a node within
/// tolerance of an edge interior is inserted there. Endpoints matching no
/// node get synthesized ids above the largest input id. Output segment ids
/// are `"{polyline id}-{piece index}"`. Zero-length polylines are skipped.
pub fn split_at_nodes(
    polylines: &[InputPolyline],
    nodes: &[Node],
    snap_tolerance_m: f64,
) -> Result<Vec<RoadSegment>, GraphError> {
    if !(snap_tolerance_m > 0.0 && snap_tolerance_m.is_finite()) {
        return Err(GraphError::BadTolerance(snap_tolerance_m));
    }
    let grid = GridIndex::new(nodes.iter().map(|n| n.coords), NODE_GRID_DEG);
    let next_id = nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(1);
    let mut registry = EndpointRegistry::new(snap_tolerance_m, next_id);
    let mut out = Vec::new();

    for line in polylines {
        let pts = dedup(&line.geometry);
        let total = if pts.len() >= 2 { polyline_length(&pts)? } else { 0.0 };
        if total <= 0.0 {
            warn!(polyline = %line.id, "skipping degenerate polyline");
            continue;
        }

        let mut candidates = std::collections::BTreeSet::new();
        for w in pts.windows(2) {
            candidates.extend(grid.near_box(w[0], w[1], snap_tolerance_m));
        }

        // Best cut per vertex: (distance, node id).
        let mut vertex_cuts: HashMap<usize, (f64, &Node)> = HashMap::new();
        let mut interior_cuts: Vec<(usize, f64, &Node)> = Vec::new();
        for &ni in &candidates {
            let node = &nodes[ni];
            let mut best: Option<(f64, usize, f64)> = None;
            for (i, w) in pts.windows(2).enumerate() {
                let (d, t) = point_segment_distance(node.coords, w[0], w[1]);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, t));
                }
            }
            let Some((d, edge, t)) = best else { continue };
            if d > snap_tolerance_m {
                continue;
            }
            let da = haversine_m(node.coords, pts[edge]);
            let db = haversine_m(node.coords, pts[edge + 1]);
            let cut = if da.min(db) <= snap_tolerance_m {
                if da <= db {
                    (Cut::Vertex(edge), da)
                } else {
                    (Cut::Vertex(edge + 1), db)
                }
            } else {
                (Cut::Interior { edge, t }, d)
            };
            match cut {
                (Cut::Vertex(k), dist) => {
                    let slot = vertex_cuts.entry(k).or_insert((dist, node));
                    if dist < slot.0 || (dist == slot.0 && node.id < slot.1.id) {
                        *slot = (dist, node);
                    }
                }
                (Cut::Interior { edge, t }, _) => interior_cuts.push((edge, t, node)),
            }
        }
        interior_cuts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.id.cmp(&b.2.id)));

        // Walk the line, emitting vertices and inserted cut points.
        let mut verts: Vec<(Coord, Option<NodeId>)> = Vec::with_capacity(pts.len() + interior_cuts.len());
        let mut interior = interior_cuts.iter().peekable();
        for (k, p) in pts.iter().enumerate() {
            match vertex_cuts.get(&k) {
                Some((_, node)) => verts.push((node.coords, Some(node.id))),
                None => verts.push((*p, None)),
            }
            while let Some((edge, _, node)) = interior.peek() {
                if *edge != k {
                    break;
                }
                verts.push((node.coords, Some(node.id)));
                interior.next();
            }
        }
        for end in [0, verts.len() - 1] {
            if verts[end].1.is_none() {
                let (id, c) = registry.resolve(verts[end].0);
                verts[end] = (c, Some(id));
            }
        }

        let mut piece = 0usize;
        let mut start = 0usize;
        for j in 1..verts.len() {
            let Some(to) = verts[j].1 else { continue };
            let geometry: Vec<Coord> = verts[start..=j].iter().map(|v| v.0).collect();
            let length_m = polyline_length(&geometry)?;
            if length_m > 0.0 {
                out.push(RoadSegment {
                    id: format!("{}-{piece}", line.id),
                    road_number: line.road_number,
                    from_node: verts[start].1.expect("cut points carry node ids"),
                    to_node: to,
                    geometry,
                    length_m,
                });
                piece += 1;
            }
            start = j;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, pts: &[(f64, f64)]) -> InputPolyline {
        InputPolyline {
            id: id.into(),
            road_number: Some(4),
            geometry: pts.iter().map(|&(lat, lon)| Coord::new(lat, lon)).collect(),
        }
    }

    fn node(id: u64, lat: f64, lon: f64) -> Node {
        Node { id: NodeId(id), coords: Coord::new(lat, lon) }
    }

    #[test]
    fn splits_at_interior_vertex() {
        let l = line("r", &[(65.0, 25.0), (65.0, 25.01), (65.0, 25.02)]);
        let segs = split_at_nodes(&[l], &[node(1, 65.0, 25.0), node(2, 65.0, 25.01), node(3, 65.0, 25.02)], 1.0).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!((segs[0].from_node, segs[0].to_node), (NodeId(1), NodeId(2)));
        assert_eq!((segs[1].from_node, segs[1].to_node), (NodeId(2), NodeId(3)));
        assert_eq!(segs[0].id, "r-0");
        assert_eq!(segs[1].id, "r-1");
    }

    #[test]
    fn far_node_leaves_line_intact() {
        let l = line("r", &[(65.0, 25.0), (65.0, 25.02)]);
        // ~50 m north of the line midpoint.
        let off = node(9, 65.0 + 50.0 / 111_195.0, 25.01);
        let segs = split_at_nodes(std::slice::from_ref(&l), &[off], 1.0).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].geometry, l.geometry);
    }

    #[test]
    fn endpoint_node_leaves_line_intact() {
        let l = line("r", &[(65.0, 25.0), (65.0, 25.02)]);
        let segs = split_at_nodes(&[l], &[node(4, 65.0, 25.0)], 1.0).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].from_node, NodeId(4));
        assert_eq!(segs[0].to_node, NodeId(5));
    }

    #[test]
    fn inserts_node_on_edge_interior() {
        let l = line("r", &[(65.0, 25.0), (65.0, 25.02)]);
        let segs = split_at_nodes(&[l], &[node(1, 65.0, 25.005)], 1.0).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].to_node, NodeId(1));
        assert_eq!(segs[0].geometry.last().unwrap().lon, 25.005);
    }

    #[test]
    fn shared_endpoints_get_one_synthesized_id() {
        let a = line("a", &[(65.0, 25.0), (65.0, 25.01)]);
        let b = line("b", &[(65.0, 25.01), (65.01, 25.01)]);
        let segs = split_at_nodes(&[a, b], &[], 1.0).unwrap();
        assert_eq!(segs[0].to_node, segs[1].from_node);
    }

    #[test]
    fn degenerate_lines_are_skipped() {
        let l = line("z", &[(65.0, 25.0), (65.0, 25.0)]);
        assert!(split_at_nodes(&[l], &[], 1.0).unwrap().is_empty());
        assert!(split_at_nodes(&[], &[], 0.0).is_err());
    }
}
