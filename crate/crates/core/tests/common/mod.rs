#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rwroute_core::fusion::SegmentWeightVector;
use rwroute_core::graph::geojson::load_network;
use rwroute_core::graph::{NodeId, RoadNetwork, DEFAULT_SNAP_TOLERANCE_M};
use rwroute_core::pipeline::ScenarioCatalog;
use rwroute_core::router::{edge_cost, PreferenceVector};
use rwroute_core::weights::ScaleRegistry;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn network() -> RoadNetwork {
    let f = fixtures();
    load_network(&f.join("network.geojson"), Some(&f.join("nodes.geojson")), DEFAULT_SNAP_TOLERANCE_M).unwrap()
}

pub fn catalog() -> ScenarioCatalog {
    ScenarioCatalog::load_dir(network(), &fixtures().join("scenarios"), &ScaleRegistry::default()).unwrap()
}

/// Cheapest simple path by exhaustive enumeration: (cost, segment ids).
pub fn brute_force(
    net: &RoadNetwork,
    weights: &BTreeMap<String, SegmentWeightVector>,
    p: &PreferenceVector,
    from: NodeId,
    to: NodeId,
) -> Option<(f64, Vec<String>)> {
    #[allow(clippy::too_many_arguments)]
    fn walk(
        net: &RoadNetwork,
        weights: &BTreeMap<String, SegmentWeightVector>,
        p: &PreferenceVector,
        at: NodeId,
        to: NodeId,
        seen: &mut Vec<NodeId>,
        path: &mut Vec<String>,
        cost: f64,
        best: &mut Option<(f64, Vec<String>)>,
    ) {
        if at == to {
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, path.clone()));
            }
            return;
        }
        for seg in net.incident(at) {
            let next = seg.other_end(at);
            if seen.contains(&next) {
                continue;
            }
            seen.push(next);
            path.push(seg.id.clone());
            let c = cost + edge_cost(&weights[&seg.id], p);
            walk(net, weights, p, next, to, seen, path, c, best);
            path.pop();
            seen.pop();
        }
    }
    let mut best = None;
    walk(net, weights, p, from, to, &mut vec![from], &mut Vec::new(), 0.0, &mut best);
    best
}

use rand::rngs::StdRng;
use rand::Rng;
use rwroute_core::geo::{haversine_m, Coord};
use rwroute_core::graph::{build_graph, RoadSegment};

/// A random connected multigraph with up to `max_nodes` nodes and
/// `max_edges` edges, random weight vectors and a random preference.
/// Weights are drawn from a coarse grid part of the time so equal-cost
/// alternatives are common.
pub fn random_instance(
    rng: &mut StdRng,
    max_nodes: usize,
    max_edges: usize,
) -> (RoadNetwork, BTreeMap<String, SegmentWeightVector>, PreferenceVector) {
    let n = rng.gen_range(2..=max_nodes);
    let coords: Vec<Coord> =
        (0..n).map(|_| Coord::new(65.0 + rng.gen_range(0.0..0.2), 25.0 + rng.gen_range(0.0..0.4))).collect();
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let extra = rng.gen_range(0..=max_edges.saturating_sub(pairs.len()));
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            pairs.push((a, b));
        }
    }
    let coarse = rng.gen_bool(0.5);
    let draw = |rng: &mut StdRng| if coarse { rng.gen_range(0..=4) as f64 / 4.0 } else { rng.gen_range(0.0..1.0) };
    let mut segments = Vec::new();
    let mut weights = BTreeMap::new();
    for (k, (a, b)) in pairs.into_iter().enumerate() {
        let id = format!("e{k}");
        let geometry = vec![coords[a], coords[b]];
        segments.push(RoadSegment {
            id: id.clone(),
            road_number: None,
            from_node: NodeId(a as u64 + 1),
            to_node: NodeId(b as u64 + 1),
            length_m: haversine_m(coords[a], coords[b]),
            geometry,
        });
        let w = SegmentWeightVector::new(draw(rng), draw(rng), draw(rng), draw(rng));
        weights.insert(id, w);
    }
    let raw = [(); 4].map(|_| if coarse { rng.gen_range(1..=4) as f64 } else { rng.gen_range(0.01..1.0) });
    let p = PreferenceVector::normalized(raw).unwrap();
    (build_graph(segments).unwrap(), weights, p)
}
