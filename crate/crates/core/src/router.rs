//! Preference vectors and preference-weighted shortest routes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::error::RouteError;
use crate::fusion::SegmentWeightVector;
use crate::geo::Coord;
use crate::graph::{nearest_node, NodeId, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceRating {
    Unimportant,
    Somewhat,
    Important,
    Very,
}

impl ImportanceRating {
    pub const ALL: [ImportanceRating; 4] = [
        ImportanceRating::Unimportant,
        ImportanceRating::Somewhat,
        ImportanceRating::Important,
        ImportanceRating::Very,
    ];

    pub fn raw(self) -> f64 {
        match self {
            ImportanceRating::Unimportant => 0.05,
            ImportanceRating::Somewhat => 0.25,
            ImportanceRating::Important => 0.5,
            ImportanceRating::Very => 0.75,
        }
    }
}

/// Driver preferences over (length, traffic, weather, events), summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreferenceVector {
    pub length: f64,
    pub traffic: f64,
    pub weather: f64,
    pub events: f64,
}

const SUM_TOLERANCE: f64 = 1e-9;

impl PreferenceVector {
    /// Accepts a vector that already sums to 1.
    pub fn new(v: [f64; 4]) -> Result<Self, RouteError> {
        check_components(&v)?;
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(RouteError::InvalidPreference(format!("components sum to {sum}, expected 1")));
        }
        Ok(Self::from_array(v))
    }

    /// Divides nonnegative raw weights by their sum.
    pub fn normalized(raw: [f64; 4]) -> Result<Self, RouteError> {
        check_components(&raw)?;
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return Err(RouteError::InvalidPreference("all components are zero".into()));
        }
        Ok(Self::from_array(raw.map(|x| x / sum)))
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.length, self.traffic, self.weather, self.events]
    }

    fn from_array(v: [f64; 4]) -> Self {
        PreferenceVector { length: v[0], traffic: v[1], weather: v[2], events: v[3] }
    }
}

impl<'de> Deserialize<'de> for PreferenceVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            length: f64,
            traffic: f64,
            weather: f64,
            events: f64,
        }
        let r = Raw::deserialize(d)?;
        PreferenceVector::new([r.length, r.traffic, r.weather, r.events]).map_err(serde::de::Error::custom)
    }
}

fn check_components(v: &[f64; 4]) -> Result<(), RouteError> {
    for (name, x) in ["length", "traffic", "weather", "events"].iter().zip(v) {
        if !(x.is_finite() && *x >= 0.0) {
            return Err(RouteError::InvalidPreference(format!("{name} must be a nonnegative number, got {x}")));
        }
    }
    Ok(())
}

pub fn preference_from_ratings(ratings: [ImportanceRating; 4]) -> PreferenceVector {
    PreferenceVector::normalized(ratings.map(ImportanceRating::raw)).expect("ratings are positive")
}

/// A driver profile as stored on disk or sent to the service: four
/// ratings, an explicit vector, or both (then they must agree).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratings: Option<Vec<ImportanceRating>>,
    /// Nonnegative weights; normalized by their sum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
}

/// A ratings/vector pair that agrees within this tolerance is accepted.
const PROFILE_AGREEMENT: f64 = 1e-6;

impl Profile {
    pub fn from_ratings(name: &str, ratings: [ImportanceRating; 4]) -> Self {
        Profile { name: Some(name.into()), ratings: Some(ratings.to_vec()), vector: None }
    }

    pub fn preference(&self) -> Result<PreferenceVector, RouteError> {
        let from_ratings = match &self.ratings {
            Some(r) => {
                let r: [ImportanceRating; 4] = r.as_slice().try_into().map_err(|_| {
                    RouteError::InvalidPreference(format!("ratings must have 4 entries, got {}", r.len()))
                })?;
                Some(preference_from_ratings(r))
            }
            None => None,
        };
        let from_vector = match &self.vector {
            Some(v) => {
                let v: [f64; 4] = v.as_slice().try_into().map_err(|_| {
                    RouteError::InvalidPreference(format!("vector must have 4 entries, got {}", v.len()))
                })?;
                Some(PreferenceVector::normalized(v)?)
            }
            None => None,
        };
        match (from_ratings, from_vector) {
            (None, None) => Err(RouteError::InvalidPreference("profile needs `ratings` or `vector`".into())),
            (Some(p), None) | (None, Some(p)) => Ok(p),
            (Some(r), Some(v)) => {
                let gap = r.as_array().iter().zip(v.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if gap > PROFILE_AGREEMENT {
                    return Err(RouteError::InvalidPreference(format!(
                        "ratings and vector disagree by {gap:.3e}"
                    )));
                }
                Ok(v)
            }
        }
    }
}

/// Built-in profiles by name.
pub fn preset(name: &str) -> Option<Profile> {
    use ImportanceRating::*;
    let ratings = match name {
        "tapio" => [Very, Somewhat, Unimportant, Somewhat],
        "tuire" => [Unimportant, Unimportant, Very, Very],
        "teemu" => [Unimportant, Very, Unimportant, Very],
        _ => return None,
    };
    Some(Profile::from_ratings(name, ratings))
}

pub const PRESET_NAMES: [&str; 3] = ["tapio", "teemu", "tuire"];

/// Dot product, summed in the order length, traffic, weather, events.
pub fn edge_cost(w: &SegmentWeightVector, p: &PreferenceVector) -> f64 {
    w.length * p.length + w.traffic * p.traffic + w.weather * p.weather + w.events * p.events
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub from_node: NodeId,
    pub to_node: NodeId,
    /// Distance from the requested origin to `from_node`, meters.
    pub from_snap_m: f64,
    pub to_snap_m: f64,
    pub nodes: Vec<NodeId>,
    pub segments: Vec<String>,
    pub total_cost: f64,
    pub total_length_m: f64,
    pub breakdown: SegmentWeightVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
    pos: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed: BinaryHeap is a max-heap and we want the cheapest, then
    // the smallest node id.
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn segment_costs(
    network: &RoadNetwork,
    weights: &BTreeMap<String, SegmentWeightVector>,
    p: &PreferenceVector,
) -> Result<Vec<f64>, RouteError> {
    network
        .segments()
        .iter()
        .map(|s| {
            let w = weights.get(&s.id).ok_or_else(|| RouteError::MissingWeights(s.id.clone()))?;
            let c = edge_cost(w, p);
            if !(c >= 0.0 && c.is_finite()) {
                return Err(RouteError::NegativeCost { segment: s.id.clone(), cost: c });
            }
            Ok(c)
        })
        .collect()
}

/// Cheapest route between two nodes.
///
/// Costs accumulate from the source one edge at a time. Among equal-cost
/// alternatives the predecessor with the smaller node id wins, then the
/// smaller segment id, so results do not depend on input order.
pub fn shortest_route_between(
    network: &RoadNetwork,
    weights: &BTreeMap<String, SegmentWeightVector>,
    p: &PreferenceVector,
    from: NodeId,
    to: NodeId,
) -> Result<Route, RouteError> {
    if network.is_empty() {
        return Err(RouteError::EmptyNetwork);
    }
    let no_route = RouteError::NoRoute { from: from.0, to: to.0 };
    let (Some(src), Some(dst)) = (network.node_position(from), network.node_position(to)) else {
        return Err(no_route);
    };
    let costs = segment_costs(network, weights, p)?;
    let nodes = network.nodes();
    let segs = network.segments();

    let n = nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry { cost: 0.0, node: from, pos: src });

    while let Some(Entry { cost, pos: u, .. }) = heap.pop() {
        if done[u] || cost > dist[u] {
            continue;
        }
        done[u] = true;
        if u == dst {
            break;
        }
        for &si in network.incident_positions(u) {
            let s = &segs[si];
            let v_id = s.other_end(nodes[u].id);
            let v = network.node_position(v_id).expect("segment endpoints are nodes");
            if done[v] {
                continue;
            }
            let nd = dist[u] + costs[si];
            let better = match nd.total_cmp(&dist[v]) {
                Ordering::Less => true,
                Ordering::Equal => match pred[v] {
                    Some((pu, ps)) => (nodes[u].id, &s.id) < (nodes[pu].id, &segs[ps].id),
                    None => false,
                },
                Ordering::Greater => false,
            };
            if better {
                dist[v] = nd;
                pred[v] = Some((u, si));
                heap.push(Entry { cost: nd, node: v_id, pos: v });
            }
        }
    }
    if !done[dst] {
        return Err(no_route);
    }

    let mut node_path = vec![dst];
    let mut seg_path = Vec::new();
    let mut cur = dst;
    while let Some((u, si)) = pred[cur] {
        seg_path.push(si);
        node_path.push(u);
        cur = u;
    }
    node_path.reverse();
    seg_path.reverse();

    let segments: Vec<String> = seg_path.iter().map(|&i| segs[i].id.clone()).collect();
    let breakdown = route_breakdown(&segments, weights)?;
    Ok(Route {
        from_node: from,
        to_node: to,
        from_snap_m: 0.0,
        to_snap_m: 0.0,
        nodes: node_path.iter().map(|&i| nodes[i].id).collect(),
        total_length_m: seg_path.iter().map(|&i| segs[i].length_m).sum(),
        segments,
        total_cost: dist[dst],
        breakdown,
    })
}

/// Cheapest route between the nodes nearest to two coordinates.
pub fn shortest_route(
    network: &RoadNetwork,
    weights: &BTreeMap<String, SegmentWeightVector>,
    p: &PreferenceVector,
    from: Coord,
    to: Coord,
) -> Result<Route, RouteError> {
    let snap = |c| nearest_node(network, c).map_err(|_| RouteError::EmptyNetwork);
    let (a, da) = snap(from)?;
    let (b, db) = snap(to)?;
    let mut route = shortest_route_between(network, weights, p, a.id, b.id)?;
    route.from_snap_m = da;
    route.to_snap_m = db;
    Ok(route)
}

/// Componentwise sums of the traversed segments' weight vectors.
pub fn route_breakdown(
    segments: &[String],
    weights: &BTreeMap<String, SegmentWeightVector>,
) -> Result<SegmentWeightVector, RouteError> {
    let mut acc = [0.0; 4];
    for id in segments {
        let w = weights.get(id).ok_or_else(|| RouteError::MissingWeights(id.clone()))?;
        for (a, x) in acc.iter_mut().zip(w.as_array()) {
            *a += x;
        }
    }
    Ok(SegmentWeightVector::from_array(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::polyline_length;
    use crate::graph::{build_graph, RoadSegment};
    use ImportanceRating::*;

    fn assert_vec(p: PreferenceVector, want: [f64; 4], tol: f64) {
        for (a, b) in p.as_array().iter().zip(want) {
            assert!((a - b).abs() <= tol, "{:?} vs {want:?}", p.as_array());
        }
    }

    #[test]
    fn preset_vectors() {
        assert_vec(
            preference_from_ratings([Very, Somewhat, Unimportant, Somewhat]),
            [0.576923077, 0.192307692, 0.038461538, 0.192307692],
            1e-6,
        );
        assert_vec(preference_from_ratings([Unimportant, Unimportant, Very, Very]), [0.03125, 0.03125, 0.46875, 0.46875], 1e-12);
        assert_vec(preference_from_ratings([Important; 4]), [0.25; 4], 1e-12);
        assert_vec(preset("teemu").unwrap().preference().unwrap(), [0.03125, 0.46875, 0.03125, 0.46875], 1e-12);
        assert!(preset("nobody").is_none());
    }

    #[test]
    fn profile_validation() {
        let p = Profile { vector: Some(vec![0.2; 5]), ..Default::default() };
        assert!(matches!(p.preference(), Err(RouteError::InvalidPreference(_))));
        let p = Profile { vector: Some(vec![1.0, 1.0, 1.0, 1.0]), ..Default::default() };
        assert_vec(p.preference().unwrap(), [0.25; 4], 0.0);
        let p = Profile { vector: Some(vec![1.0, -1.0, 1.0, 1.0]), ..Default::default() };
        assert!(p.preference().is_err());
        assert!(Profile::default().preference().is_err());
        let p = Profile {
            ratings: Some(vec![Very, Very, Very, Very]),
            vector: Some(vec![1.0, 0.0, 0.0, 0.0]),
            ..Default::default()
        };
        assert!(p.preference().is_err());
        assert!(PreferenceVector::new([0.5, 0.5, 0.5, 0.0]).is_err());
    }

    #[test]
    fn edge_cost_examples() {
        let tuire = preset("tuire").unwrap().preference().unwrap();
        let c = edge_cost(&SegmentWeightVector::new(0.5, 0.2, 0.1, 0.0), &tuire);
        assert!((c - 0.06875).abs() < 1e-12);
        assert_eq!(edge_cost(&SegmentWeightVector::default(), &tuire), 0.0);
        let len = PreferenceVector::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(edge_cost(&SegmentWeightVector::new(1.5, 0.3, 0.3, 0.3), &len), 1.5);
    }

    fn seg(id: &str, a: u64, b: u64) -> RoadSegment {
        let c = |n: u64| Coord::new(65.0, 25.0 + n as f64 * 0.01);
        let geometry = vec![c(a), c(b)];
        RoadSegment {
            id: id.into(),
            road_number: None,
            from_node: NodeId(a),
            to_node: NodeId(b),
            length_m: polyline_length(&geometry).unwrap(),
            geometry,
        }
    }

    fn weights(list: &[(&str, f64)]) -> BTreeMap<String, SegmentWeightVector> {
        list.iter().map(|(id, l)| (id.to_string(), SegmentWeightVector::new(*l, 0.0, 0.0, 0.0))).collect()
    }

    fn length_only() -> PreferenceVector {
        PreferenceVector::new([1.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn single_segment_and_disconnected() {
        let net = build_graph(vec![seg("a", 1, 2), seg("b", 3, 4)]).unwrap();
        let w = weights(&[("a", 1.0), ("b", 1.0)]);
        let r = shortest_route_between(&net, &w, &length_only(), NodeId(1), NodeId(2)).unwrap();
        assert_eq!(r.segments, vec!["a"]);
        assert_eq!(r.nodes, vec![NodeId(1), NodeId(2)]);
        assert_eq!(r.breakdown, w["a"]);
        assert_eq!(
            shortest_route_between(&net, &w, &length_only(), NodeId(1), NodeId(4)).unwrap_err(),
            RouteError::NoRoute { from: 1, to: 4 }
        );
        let r = shortest_route_between(&net, &w, &length_only(), NodeId(1), NodeId(1)).unwrap();
        assert!(r.segments.is_empty());
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn ties_prefer_smaller_predecessor() {
        // 1-2-4 and 1-3-4 cost the same; the path through 2 wins.
        let net = build_graph(vec![seg("d", 3, 4), seg("a", 1, 3), seg("c", 2, 4), seg("b", 1, 2)]).unwrap();
        let w = weights(&[("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)]);
        let r = shortest_route_between(&net, &w, &length_only(), NodeId(1), NodeId(4)).unwrap();
        assert_eq!(r.nodes, vec![NodeId(1), NodeId(2), NodeId(4)]);
        assert_eq!(r.total_cost, 2.0);
    }

    #[test]
    fn missing_weights_and_snapping() {
        let net = build_graph(vec![seg("a", 1, 2)]).unwrap();
        assert_eq!(
            shortest_route_between(&net, &BTreeMap::new(), &length_only(), NodeId(1), NodeId(2)).unwrap_err(),
            RouteError::MissingWeights("a".into())
        );
        let w = weights(&[("a", 2.0)]);
        let r = shortest_route(&net, &w, &length_only(), Coord::new(65.0001, 25.01), Coord::new(65.0, 25.02)).unwrap();
        assert_eq!(r.from_node, NodeId(1));
        assert!(r.from_snap_m > 10.0 && r.to_snap_m == 0.0);
        let empty = build_graph(vec![]).unwrap();
        assert_eq!(
            shortest_route(&empty, &w, &length_only(), Coord::new(0.0, 0.0), Coord::new(0.0, 0.0)).unwrap_err(),
            RouteError::EmptyNetwork
        );
    }
}
