#![allow(dead_code)]

//! Random small instances for property and fault-injection tests.

pub mod faults;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robovf::model::{
    build_graph, validate_services, HardwareGraph, Link, Node, NodeId, RadioState, ServiceId, ServiceSpec, Tier,
    VfId, VfSpec, VlSpec,
};

pub const ROBOT: NodeId = NodeId(0);

#[derive(Debug, Clone)]
pub struct Instance {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub graph: HardwareGraph,
    pub services: Vec<ServiceSpec>,
    pub radio: RadioState,
}

impl Instance {
    /// Rebuild the graph after editing `nodes` or `links`.
    pub fn rebuilt(&self) -> HardwareGraph {
        build_graph(self.nodes.clone(), self.links.clone()).unwrap()
    }

    pub fn poas(&self) -> Vec<NodeId> {
        self.graph.poas_of(ROBOT)
    }
}

/// Robot `n0`, 1-3 PoAs, 0-3 switches and 1-4 servers. PoAs and switches
/// form a random tree, servers hang off it, a few extra links are sprinkled
/// in. One or two chain services start at a VF pinned to the robot.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poas = rng.random_range(1..=3u32);
    let switches = rng.random_range(0..=3u32);
    let servers = rng.random_range(1..=4u32);
    let mut nodes = vec![Node::robot(ROBOT, rng.random_range(2.0..4.0), rng.random_range(5.0..20.0))];
    let mut id = 1;
    let mut backbone = Vec::new();
    for _ in 0..poas {
        nodes.push(Node::poa(NodeId(id)));
        backbone.push(NodeId(id));
        id += 1;
    }
    for _ in 0..switches {
        nodes.push(Node::switch(NodeId(id)));
        backbone.push(NodeId(id));
        id += 1;
    }
    let mut server_ids = Vec::new();
    for _ in 0..servers {
        let tier = [Tier::NearEdge, Tier::FarEdge, Tier::Cloud][rng.random_range(0..3)];
        nodes.push(Node::server(NodeId(id), tier, rng.random_range(4.0..16.0), rng.random_range(5.0..20.0)));
        server_ids.push(NodeId(id));
        id += 1;
    }

    let mut links: Vec<Link> = Vec::new();
    let wired = |links: &mut Vec<Link>, a: NodeId, b: NodeId, rng: &mut ChaCha8Rng| {
        if a == b || links.iter().any(|l| l.key() == Link::new(a, b, 1.0, 0.0).key()) {
            return;
        }
        let mut l = Link::new(a, b, rng.random_range(50.0..1000.0), rng.random_range(0.5..5.0));
        if rng.random_bool(0.2) {
            l = l.with_queuing(rng.random_range(0.0..1.0));
        }
        links.push(l);
    };
    for &p in &backbone[..poas as usize] {
        let bw = rng.random_range(50.0..200.0);
        let mut l = Link::new(ROBOT, p, bw, rng.random_range(0.0..1.0));
        if rng.random_bool(0.3) {
            l = l.with_drop(0.1);
        }
        links.push(l);
    }
    for i in 1..backbone.len() {
        let j = rng.random_range(0..i);
        wired(&mut links, backbone[i], backbone[j], &mut rng);
    }
    for &s in &server_ids {
        let b = backbone[rng.random_range(0..backbone.len())];
        wired(&mut links, s, b, &mut rng);
        if rng.random_bool(0.4) {
            let b = backbone[rng.random_range(0..backbone.len())];
            wired(&mut links, s, b, &mut rng);
        }
    }
    for _ in 0..rng.random_range(0..3) {
        let core: Vec<NodeId> = backbone.iter().chain(&server_ids).copied().collect();
        let a = core[rng.random_range(0..core.len())];
        let b = core[rng.random_range(0..core.len())];
        wired(&mut links, a, b, &mut rng);
    }

    let mut radio = RadioState::new(1.0).unwrap();
    for &p in &backbone[..poas as usize] {
        radio.set_sigma(ROBOT, p, rng.random_range(0.5..20.0)).unwrap();
    }

    let mut services = Vec::new();
    let mut vf_id = 1;
    for s in 0..rng.random_range(1..=2u32) {
        let len = rng.random_range(2..=4u32);
        let mut vfs = vec![VfSpec {
            id: VfId(vf_id),
            compute: 0.5,
            pin: Some(ROBOT),
        }];
        for k in 1..len {
            vfs.push(VfSpec {
                id: VfId(vf_id + k),
                compute: rng.random_range(0.5..3.0),
                pin: None,
            });
        }
        let vls = (0..len - 1)
            .map(|k| VlSpec {
                from: VfId(vf_id + k),
                to: VfId(vf_id + k + 1),
                demand: rng.random_range(1.0..20.0),
            })
            .collect();
        vf_id += len;
        let deadline = if rng.random_bool(0.2) {
            f64::INFINITY
        } else {
            rng.random_range(10.0..60.0)
        };
        services.push(ServiceSpec {
            id: ServiceId(s),
            vfs,
            vls,
            deadline,
        });
    }
    let graph = build_graph(nodes.clone(), links.clone()).unwrap();
    validate_services(&graph, &services).unwrap();
    Instance {
        nodes,
        links,
        graph,
        services,
        radio,
    }
}
