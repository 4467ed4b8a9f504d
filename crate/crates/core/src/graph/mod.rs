//! The routable road network.

mod assign;
pub mod geojson;
mod index;
mod split;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::geo::{haversine_m, Coord};

pub use assign::{assign_stations, AssignmentOverrides, SegmentOverride, SegmentStations, StationAssignment};
pub use split::{split_at_nodes, InputPolyline, DEFAULT_SNAP_TOLERANCE_M};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub coords: Coord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSegment {
    pub id: String,
    pub road_number: Option<u32>,
    pub from_node: NodeId,
    pub to_node: NodeId,
    pub geometry: Vec<Coord>,
    pub length_m: f64,
}

impl RoadSegment {
    pub fn other_end(&self, node: NodeId) -> NodeId {
        if self.from_node == node {
            self.to_node
        } else {
            self.from_node
        }
    }
}

/// Endpoints sharing an id must agree to within this distance.
const NODE_CONSISTENCY_M: f64 = 1.0;

/// Undirected road network, one edge per segment. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct RoadNetwork {
    nodes: Vec<Node>,
    node_index: HashMap<NodeId, usize>,
    segments: Vec<RoadSegment>,
    segment_index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
}

impl RoadNetwork {
    /// Nodes ordered by id.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn segment(&self, id: &str) -> Option<&RoadSegment> {
        self.segment_index.get(id).map(|&i| &self.segments[i])
    }

    pub(crate) fn node_position(&self, id: NodeId) -> Option<usize> {
        self.node_index.get(&id).copied()
    }

    /// Segment positions incident to the node at position `pos`.
    pub(crate) fn incident_positions(&self, pos: usize) -> &[usize] {
        &self.adjacency[pos]
    }

    pub fn incident(&self, id: NodeId) -> impl Iterator<Item = &RoadSegment> {
        self.node_index
            .get(&id)
            .into_iter()
            .flat_map(move |&i| self.adjacency[i].iter().map(move |&s| &self.segments[s]))
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.node_index.get(&id).map_or(0, |&i| self.adjacency[i].len())
    }

    pub fn max_segment_length(&self) -> Option<f64> {
        self.segments.iter().map(|s| s.length_m).fold(None, |m, l| Some(m.map_or(l, |m: f64| m.max(l))))
    }
}

/// Builds the network, synthesizing nodes from segment endpoints.
pub fn build_graph(segments: Vec<RoadSegment>) -> Result<RoadNetwork, GraphError> {
    let mut coords: BTreeMap<NodeId, Coord> = BTreeMap::new();
    let mut segment_index = HashMap::with_capacity(segments.len());
    for (i, s) in segments.iter().enumerate() {
        if segment_index.insert(s.id.clone(), i).is_some() {
            return Err(GraphError::DuplicateSegment(s.id.clone()));
        }
        let (Some(first), Some(last)) = (s.geometry.first(), s.geometry.last()) else {
            return Err(GraphError::TooFewPoints(0));
        };
        for (id, c) in [(s.from_node, *first), (s.to_node, *last)] {
            match coords.get(&id) {
                Some(prev) if haversine_m(*prev, c) > NODE_CONSISTENCY_M => {
                    return Err(GraphError::InconsistentNode { id: id.0 });
                }
                Some(_) => {}
                None => {
                    coords.insert(id, c);
                }
            }
        }
    }

    let nodes: Vec<Node> = coords.into_iter().map(|(id, coords)| Node { id, coords }).collect();
    let node_index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (i, s) in segments.iter().enumerate() {
        let a = node_index[&s.from_node];
        let b = node_index[&s.to_node];
        adjacency[a].push(i);
        if b != a {
            adjacency[b].push(i);
        }
    }
    Ok(RoadNetwork { nodes, node_index, segments, segment_index, adjacency })
}

/// Node closest to `coords` by great-circle distance; ties go to the
/// smaller id.
pub fn nearest_node(network: &RoadNetwork, coords: Coord) -> Result<(&Node, f64), GraphError> {
    let mut best: Option<(&Node, f64)> = None;
    for n in &network.nodes {
        let d = haversine_m(n.coords, coords);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((n, d));
        }
    }
    best.ok_or(GraphError::EmptyNetwork)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::polyline_length;

    pub(crate) fn seg(id: &str, a: u64, b: u64, pa: Coord, pb: Coord) -> RoadSegment {
        let geometry = vec![pa, pb];
        RoadSegment {
            id: id.into(),
            road_number: Some(4),
            from_node: NodeId(a),
            to_node: NodeId(b),
            length_m: polyline_length(&geometry).unwrap(),
            geometry,
        }
    }

    #[test]
    fn path_of_two() {
        let (p, q, r) = (Coord::new(65.0, 25.0), Coord::new(65.0, 25.1), Coord::new(65.0, 25.2));
        let net = build_graph(vec![seg("a", 1, 2, p, q), seg("b", 2, 3, q, r)]).unwrap();
        assert_eq!(net.nodes().len(), 3);
        assert_eq!(net.segments().len(), 2);
        assert_eq!(net.degree(NodeId(2)), 2);
        assert_eq!(net.degree(NodeId(1)), 1);
    }

    #[test]
    fn triangle() {
        let (p, q, r) = (Coord::new(65.0, 25.0), Coord::new(65.0, 25.1), Coord::new(65.1, 25.05));
        let net = build_graph(vec![seg("a", 1, 2, p, q), seg("b", 2, 3, q, r), seg("c", 3, 1, r, p)]).unwrap();
        assert_eq!(net.nodes().len(), 3);
        assert!(net.nodes().iter().all(|n| net.degree(n.id) == 2));
    }

    #[test]
    fn empty_and_duplicates() {
        let net = build_graph(vec![]).unwrap();
        assert!(net.is_empty());
        assert_eq!(nearest_node(&net, Coord::new(0.0, 0.0)).unwrap_err(), GraphError::EmptyNetwork);
        let (p, q) = (Coord::new(65.0, 25.0), Coord::new(65.0, 25.1));
        assert_eq!(
            build_graph(vec![seg("a", 1, 2, p, q), seg("a", 2, 3, q, p)]).unwrap_err(),
            GraphError::DuplicateSegment("a".into())
        );
        assert_eq!(
            build_graph(vec![seg("a", 1, 2, p, q), seg("b", 1, 3, q, p)]).unwrap_err(),
            GraphError::InconsistentNode { id: 1 }
        );
    }

    #[test]
    fn nearest_prefers_exact_then_lower_id() {
        let (p, q) = (Coord::new(0.0, 1.0), Coord::new(0.0, -1.0));
        let net = build_graph(vec![seg("a", 7, 3, p, q)]).unwrap();
        let (n, d) = nearest_node(&net, p).unwrap();
        assert_eq!((n.id, d), (NodeId(7), 0.0));
        let (n, _) = nearest_node(&net, Coord::new(0.0, 0.0)).unwrap();
        assert_eq!(n.id, NodeId(3));
    }
}
