mod common;

use std::collections::BTreeSet;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rwroute_core::api::parse_route_request;
use rwroute_core::geo::{haversine_m, polyline_length, Coord};
use rwroute_core::graph::{nearest_node, split_at_nodes, InputPolyline, Node, NodeId};
use rwroute_core::ingest::{canonicalize, CodeTables, SensorMapping, SensorReading};
use rwroute_core::pipeline::to_pretty;
use rwroute_core::router::shortest_route_between;
use rwroute_core::weights::{air_temperature_weight, road_temperature_weight, ScaleKey, ScaleRegistry};

fn unit(w: f64) -> bool {
    (0.0..=1.0).contains(&w)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn weights_stay_in_unit_interval(k in 0usize..ScaleKey::ALL.len(), v in -1e6f64..1e6, t in -80f64..80.0) {
        let reg = ScaleRegistry::default();
        prop_assert!(unit(reg.weight(ScaleKey::ALL[k], v).unwrap().value()));
        prop_assert!(unit(road_temperature_weight(t).unwrap().value()));
        prop_assert!(unit(air_temperature_weight(t).unwrap().value()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn linear_scales_are_monotone(k in 0usize..ScaleKey::ALL.len(), a in -1e5f64..1e5, b in -1e5f64..1e5) {
        let key = ScaleKey::ALL[k];
        let s = key.default_scale();
        let reg = ScaleRegistry::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (wl, wh) = (reg.weight(key, lo).unwrap().value(), reg.weight(key, hi).unwrap().value());
        if s.v_one > s.v_zero {
            prop_assert!(wl <= wh);
        } else {
            prop_assert!(wl >= wh);
        }
    }

    #[test]
    fn road_temperature_peaks_at_minus_two(a in -30f64..15.0, b in -30f64..15.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (wl, wh) = (road_temperature_weight(lo).unwrap().value(), road_temperature_weight(hi).unwrap().value());
        if hi <= -2.0 {
            prop_assert!(wl <= wh);
        } else if lo >= -2.0 {
            prop_assert!(wl >= wh);
        }
        prop_assert!(wl <= 1.0 && road_temperature_weight(-2.0).unwrap().value() == 1.0);
    }

    #[test]
    fn air_temperature_bottoms_at_fourteen(a in -60f64..50.0, b in -60f64..50.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (wl, wh) = (air_temperature_weight(lo).unwrap().value(), air_temperature_weight(hi).unwrap().value());
        if hi <= 14.0 {
            prop_assert!(wl >= wh);
        } else if lo >= 14.0 {
            prop_assert!(wl <= wh);
        }
    }

    #[test]
    fn split_conserves_length(
        start in (64.0f64..66.0, 24.0f64..26.0),
        steps in prop::collection::vec((-0.02f64..0.02, -0.04f64..0.04), 1..8),
        cuts in prop::collection::vec((0usize..7, 0.05f64..0.95), 0..6),
        vertex_nodes in prop::collection::vec(0usize..8, 0..4),
    ) {
        // Keep consecutive vertices far enough apart for the snap tolerance.
        let mut geometry: Vec<Coord> = vec![Coord::new(start.0, start.1)];
        for (dlat, dlon) in steps {
            let last = *geometry.last().unwrap();
            let c = Coord::new(last.lat + dlat, last.lon + dlon);
            if geometry.last().is_none_or(|p| haversine_m(*p, c) > 50.0) {
                geometry.push(c);
            }
        }
        prop_assume!(geometry.len() >= 2);
        let total = polyline_length(&geometry).unwrap();
        let mut nodes = Vec::new();
        for (i, t) in cuts {
            let i = i % (geometry.len() - 1);
            let (a, b) = (geometry[i], geometry[i + 1]);
            nodes.push(Coord::new(a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)));
        }
        for v in vertex_nodes {
            nodes.push(geometry[v % geometry.len()]);
        }
        let nodes: Vec<Node> =
            nodes.into_iter().enumerate().map(|(i, coords)| Node { id: NodeId(i as u64 + 1), coords }).collect();
        let line = InputPolyline { id: "p".into(), road_number: None, geometry };
        let segs = split_at_nodes(&[line], &nodes, 1.0).unwrap();
        let sum: f64 = segs.iter().map(|s| s.length_m).sum();
        prop_assert!(((sum - total) / total).abs() <= 1e-6, "sum {sum} total {total}");
        for w in segs.windows(2) {
            prop_assert_eq!(w[0].to_node, w[1].from_node);
        }
    }

    #[test]
    fn canonicalize_ignores_reading_order(
        picks in prop::collection::vec((0usize..10, -30f64..30.0), 1..25),
        seed in any::<u64>(),
    ) {
        const NAMES: [&str; 10] = ["ILMA", "TIE_1", "TIE_2", "TIE_3", "KELI_1", "KELI_2", "KITKA1_LUKU",
                                   "SATEEN_OLOMUOTO_PWDXX", "SADE", "XYZZY"];
        let at = Utc.with_ymd_and_hms(2024, 3, 12, 7, 30, 0).unwrap();
        let readings: Vec<SensorReading> = picks
            .iter()
            .enumerate()
            .map(|(i, (n, v))| {
                let categorical = NAMES[*n].starts_with("KELI") || NAMES[*n].starts_with("SA");
                let value = if categorical { v.abs().floor() % 10.0 } else { *v };
                SensorReading { sensor_id: i as u32 + 1, name: NAMES[*n].into(), value, unit: None, measured_at: at }
            })
            .collect();
        let mut shuffled = readings.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut StdRng::seed_from_u64(seed));
        let (m, c) = (SensorMapping::default(), CodeTables::default());
        prop_assert_eq!(canonicalize(&readings, &m, &c, None), canonicalize(&shuffled, &m, &c, None));
    }
}

#[test]
fn nearest_node_matches_linear_scan() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..1000 {
        let (net, _, _) = common::random_instance(&mut rng, 10, 20);
        let q = Coord::new(65.0 + rand::Rng::gen_range(&mut rng, -0.05..0.25), 25.0 + rand::Rng::gen_range(&mut rng, -0.05..0.45));
        let (n, d) = nearest_node(&net, q).unwrap();
        let best = net.nodes().iter().map(|n| haversine_m(n.coords, q)).fold(f64::INFINITY, f64::min);
        assert_eq!(d, best);
        assert_eq!(haversine_m(n.coords, q), best);
    }
}

#[test]
fn dijkstra_matches_exhaustive_search() {
    let mut rng = StdRng::seed_from_u64(42);
    for case in 0..200 {
        let (net, w, p) = common::random_instance(&mut rng, 10, 20);
        let ids: Vec<NodeId> = net.nodes().iter().map(|n| n.id).collect();
        let from = ids[0];
        let to = *ids.last().unwrap();
        let route = shortest_route_between(&net, &w, &p, from, to).unwrap();
        let (cost, _) = common::brute_force(&net, &w, &p, from, to).unwrap();
        assert_eq!(route.total_cost, cost, "case {case}");
        let nodes: BTreeSet<NodeId> = route.nodes.iter().copied().collect();
        assert_eq!(nodes.len(), route.nodes.len(), "case {case}: route repeats a node");
    }
}

#[test]
fn route_geojson_is_byte_identical_across_runs() {
    let req = parse_route_request(&serde_json::json!({
        "scenario": "golden", "from": "65.001,25.001", "to": "64.999,25.209", "profile": "teemu",
        "length_mode": "normalized"
    }))
    .unwrap();
    let a = to_pretty(&common::catalog().plan(&req).unwrap());
    let b = to_pretty(&common::catalog().plan(&req).unwrap());
    assert_eq!(a, b);
}
