//! Closed-form quantities against direct evaluation.

use robovf::feasibility::{channel_capacity, network_delay, objective, processing_delay, FeasibilityError};
use robovf::model::{
    build_graph, Embedding, HardwareGraph, Link, Node, NodeId, ServiceId, ServiceSpec, Tier, VfId, VfSpec, VlSpec,
};
use robovf::scenario::Scenario;
use robovf::topology::{degree_pmf, degree_tail, feasible_region, TierRedundancySpec};
use statrs::distribution::{Binomial, Discrete, DiscreteCDF};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

fn capacity_by_hand(bw: f64, drop: f64, sigma: f64, noise: f64) -> f64 {
    (1.0 - drop) * bw * (1.0 + sigma / noise).log2()
}

#[test]
fn channel_capacity_table() {
    let r = NodeId(0);
    let p = NodeId(1);
    let cases = [
        (100.0, 0.0, 3.0, 1.0, 200.0),
        (100.0, 0.0, 0.0, 1.0, 0.0),
        (100.0, 1.0, 3.0, 1.0, 0.0),
        (100.0, 0.5, 1.0, 1.0, 50.0),
    ];
    // the wireless flag is only set on links of a built graph
    let g = |bw: f64, drop: f64| {
        build_graph(
            vec![Node::robot(r, 1.0, 1.0), Node::poa(p)],
            vec![Link::new(r, p, bw, 0.0).with_drop(drop)],
        )
        .unwrap()
    };
    for (bw, drop, sigma, noise, expect) in cases {
        let graph = g(bw, drop);
        let t = channel_capacity(graph.link_between(r, p).unwrap(), sigma, noise).unwrap();
        assert!(close(t, expect), "{t} vs {expect}");
    }
    for bw in [1.0, 37.5, 100.0, 1000.0] {
        for drop in [0.0, 0.1, 0.5, 0.99] {
            for sigma in [0.0, 1e-6, 0.3, 1.0, 7.0, 1e4] {
                for noise in [0.01, 1.0, 3.0] {
                    let graph = g(bw, drop);
                    let t = channel_capacity(graph.link_between(r, p).unwrap(), sigma, noise).unwrap();
                    assert!(close(t, capacity_by_hand(bw, drop, sigma, noise)));
                }
            }
        }
    }
    let wired = Link::new(NodeId(1), NodeId(2), 100.0, 0.0);
    assert!(matches!(channel_capacity(&wired, 1.0, 1.0), Err(FeasibilityError::NotWireless(_))));
}

// robot -> PoA -> server with C(v) per VF and μ = 1
fn one_server(vfs: Vec<VfSpec>, vls: Vec<VlSpec>) -> (HardwareGraph, ServiceSpec, Embedding) {
    let graph = build_graph(
        vec![
            Node::robot(NodeId(0), 10.0, 1.0),
            Node::poa(NodeId(1)),
            Node::server(NodeId(2), Tier::Cloud, 10.0, 1.0),
        ],
        vec![Link::new(NodeId(0), NodeId(1), 100.0, 0.0), Link::new(NodeId(1), NodeId(2), 100.0, 1.0)],
    )
    .unwrap();
    let mut e = Embedding::new();
    for v in &vfs {
        e.place(v.id, v.pin.unwrap_or(NodeId(2)));
    }
    let s = ServiceSpec {
        id: ServiceId(0),
        vfs,
        vls,
        deadline: f64::INFINITY,
    };
    (graph, s, e)
}

fn vf(id: u32, compute: f64, pin: Option<NodeId>) -> VfSpec {
    VfSpec { id: VfId(id), compute, pin }
}

fn vl(a: u32, b: u32, demand: f64) -> VlSpec {
    VlSpec { from: VfId(a), to: VfId(b), demand }
}

#[test]
fn processing_delay_table() {
    let robot = Some(NodeId(0));
    let (g, s, e) = one_server(vec![vf(1, 1.0, robot), vf(2, 2.0, None)], vec![vl(1, 2, 1.0)]);
    assert!(close(processing_delay(&g, &s, VfId(2), &e).unwrap(), 1.0 / (2.0 - 1.0)));
    assert_eq!(processing_delay(&g, &s, VfId(1), &e).unwrap(), 0.0);

    let (g, s, e) = one_server(vec![vf(1, 1.0, robot), vf(2, 1.0, None)], vec![vl(1, 2, 1.0)]);
    assert!(matches!(
        processing_delay(&g, &s, VfId(2), &e),
        Err(FeasibilityError::Unstable { .. })
    ));

    let (g, s, e) = one_server(
        vec![vf(1, 1.0, robot), vf(3, 1.0, robot), vf(2, 4.0, None)],
        vec![vl(1, 2, 1.0), vl(3, 2, 2.0)],
    );
    assert!(close(processing_delay(&g, &s, VfId(2), &e).unwrap(), 1.0 / 3.0 + 1.0 / 2.0));

    // a grid of rates and arrivals against the direct sum
    for c in [0.5, 1.0, 3.0, 8.0] {
        for (a, b) in [(0.1, 0.2), (0.4, 0.0), (0.25, 0.49)] {
            let (g, s, e) = one_server(
                vec![vf(1, 1.0, robot), vf(3, 1.0, robot), vf(2, c, None)],
                vec![vl(1, 2, a * c), vl(3, 2, b * c)],
            );
            let by_hand = 1.0 / (c - a * c) + 1.0 / (c - b * c);
            assert!(close(processing_delay(&g, &s, VfId(2), &e).unwrap(), by_hand));
        }
    }
}

#[test]
fn network_delay_on_the_warehouse_table() {
    let scenario = Scenario::load(concat!(env!("CARGO_MANIFEST_DIR"), "/data/warehousing.json")).unwrap();
    let g = scenario.validate().unwrap();
    let s = &scenario.services[0];
    let routed = |poa: u32, server: u32| {
        let mut e = Embedding::new();
        e.place(VfId(1), NodeId(0));
        e.place(VfId(2), NodeId(server));
        e.set_route(s.vls[0].id(), vec![NodeId(0), NodeId(poa), NodeId(server)]);
        e
    };
    let (cloud, far, near) = (7, 8, 9);
    for (poa, c, f, n) in [(1, 9.0, 4.0, 3.0), (3, 9.0, 4.0, 3.0), (2, 18.0, 8.0, 9.0), (4, 18.0, 8.0, 9.0), (5, 27.0, 12.0, 9.0), (6, 27.0, 12.0, 9.0)] {
        assert_eq!(network_delay(&g, s, &routed(poa, cloud)).unwrap(), c);
        assert_eq!(network_delay(&g, s, &routed(poa, far)).unwrap(), f);
        assert_eq!(network_delay(&g, s, &routed(poa, near)).unwrap(), n);
    }
    // queuing adds on top
    let mut links = scenario.links.clone();
    for l in &mut links {
        if l.key() == Link::new(NodeId(1), NodeId(9), 1.0, 0.0).key() {
            l.queuing = 2.0;
        }
    }
    let g2 = build_graph(scenario.nodes.clone(), links).unwrap();
    assert_eq!(network_delay(&g2, s, &routed(1, near)).unwrap(), 5.0);
}

#[test]
fn objective_table() {
    let robot = NodeId(0);
    let nodes = vec![
        Node::robot(robot, 4.0, 1.0),
        Node::poa(NodeId(1)),
        Node::server(NodeId(2), Tier::Cloud, 10.0, 1.0),
        Node::server(NodeId(3), Tier::NearEdge, 10.0, 1.0),
    ];
    let links = vec![
        Link::new(robot, NodeId(1), 100.0, 0.0),
        Link::new(NodeId(1), NodeId(2), 100.0, 1.0),
        Link::new(NodeId(1), NodeId(3), 100.0, 1.0),
    ];
    let g = build_graph(nodes, links).unwrap();
    let mut e = Embedding::new();
    assert_eq!(objective(&g, &e), 0.0);
    e.place(VfId(1), robot);
    e.place(VfId(2), NodeId(2));
    assert_eq!(objective(&g, &e), 1.0);
    e.place(VfId(3), NodeId(2));
    e.place(VfId(4), NodeId(3));
    assert_eq!(objective(&g, &e), 6.0);
}

#[test]
fn degree_pmf_matches_the_binomial() {
    for (n, p) in [(48, 0.1), (48, 0.125), (128, 0.05), (2, 0.5), (10, 0.0), (10, 1.0)] {
        let sum: f64 = (0..n).map(|k| degree_pmf(n, p, k).unwrap()).sum();
        assert!((sum - 1.0).abs() <= 1e-9, "n {n} p {p}: {sum}");
        let b = Binomial::new(p, (n - 1) as u64).unwrap();
        for k in 0..n {
            assert!((degree_pmf(n, p, k).unwrap() - b.pmf(k as u64)).abs() <= 1e-12);
        }
        for k in 0..n {
            let tail = if k == 0 { 1.0 } else { b.sf(k as u64 - 1) };
            assert!((degree_tail(n, p, k) - tail).abs() <= 1e-9);
        }
    }
    // ratio recurrence pmf(k+1)/pmf(k) = (m-k)/(k+1) · p/(1-p)
    let (n, p) = (48, 0.125);
    let m = (n - 1) as f64;
    for k in 0..20 {
        let r = degree_pmf(n, p, k + 1).unwrap() / degree_pmf(n, p, k).unwrap();
        assert!(close(r, (m - k as f64) / (k as f64 + 1.0) * p / (1.0 - p)));
    }
}

#[test]
fn feasible_region_on_the_grid() {
    let spec = TierRedundancySpec::default();
    for n in [48, 128] {
        let region = feasible_region(n, &spec, 0.9).unwrap();
        let b = |p: f64| 1.0 - Binomial::new(p, (n - 1) as u64).unwrap().cdf(5);
        // the tail grows with p, so the region is one interval reaching 1
        assert_eq!(region.len(), 1);
        let (lo, hi) = region[0];
        assert_eq!(hi, 1.0);
        assert!(b(lo) >= 0.9 - 1e-9);
        assert!(b(lo - 0.001) < 0.9);
    }
}
