//! Constraint evaluation for embeddings: compute, bandwidth, flow and
//! steering, end-to-end delay, radio attachment and wireless capacity, plus
//! the Edge-cost objective.
//!
//! Violations are data: [`check_embedding`] never fails, it reports one
//! [`Violation`] per failed (constraint, location) pair in a stable order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::route_hops;
use crate::model::{
    Embedding, HardwareGraph, Link, LinkKey, NodeId, NodeKind, RadioState, ServiceId, ServiceSpec,
    VfId, VlId,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    Compute,
    VfUnplaced,
    Bandwidth,
    VlUnrouted,
    Flow,
    SteerToVf,
    Deadline,
    SteerIfAttached,
    Attachment,
    WirelessCapacity,
    Stability,
}

impl ViolationKind {
    pub const ALL: [ViolationKind; 11] = [
        ViolationKind::Compute,
        ViolationKind::VfUnplaced,
        ViolationKind::Bandwidth,
        ViolationKind::VlUnrouted,
        ViolationKind::Flow,
        ViolationKind::SteerToVf,
        ViolationKind::Deadline,
        ViolationKind::SteerIfAttached,
        ViolationKind::Attachment,
        ViolationKind::WirelessCapacity,
        ViolationKind::Stability,
    ];

    /// Kinds that mean the robot has no usable radio path.
    pub fn is_radio(self) -> bool {
        matches!(
            self,
            ViolationKind::SteerIfAttached | ViolationKind::Attachment | ViolationKind::WirelessCapacity
        )
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "snake_case")]
pub enum Location {
    Node(NodeId),
    Link(LinkKey),
    Service(ServiceId),
    Vf(VfId),
    Vl(VlId),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Node(n) => write!(f, "{n}"),
            Location::Link(l) => write!(f, "{l}"),
            Location::Service(s) => write!(f, "{s}"),
            Location::Vf(v) => write!(f, "{v}"),
            Location::Vl(l) => write!(f, "{l}"),
        }
    }
}

/// A failed constraint: `measured` exceeds (or otherwise misses) `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: Location,
    pub measured: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} (measured {}, bound {})",
            self.kind, self.location, self.measured, self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VfDelay {
    pub vf: VfId,
    pub ms: f64,
}

/// Per-service delay breakdown; `total_ms = network_ms + Σ processing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub service: ServiceId,
    pub network_ms: f64,
    pub processing: Vec<VfDelay>,
    pub total_ms: f64,
    #[serde(with = "finite_or_null")]
    pub deadline_ms: f64,
}

impl DelayReport {
    pub fn processing_ms(&self) -> f64 {
        self.processing.iter().map(|d| d.ms).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeasibilityError {
    #[error("link {0} is not a wireless robot-PoA link")]
    NotWireless(LinkKey),
    #[error("{vf} is unstable: arrival rate {arrival} >= service rate {service_rate}")]
    Unstable { vf: VfId, arrival: f64, service_rate: f64 },
    #[error("{0} is not placed")]
    UnplacedVf(VfId),
    #[error("VL {0} is not routed")]
    UnroutedVl(VlId),
    #[error("unknown {0}")]
    Unknown(String),
}

const REL_EPS: f64 = 1e-9;

/// True when `measured` exceeds `bound` beyond floating-point noise.
pub(crate) fn exceeds(measured: f64, bound: f64) -> bool {
    measured > bound + REL_EPS * bound.abs().max(1.0)
}

/// Effective wireless capacity T = (1 − δ)·λ·log₂(1 + σ/N).
pub fn shannon_capacity(bandwidth: f64, drop: f64, sigma: f64, noise: f64) -> f64 {
    (1.0 - drop) * bandwidth * (sigma / noise).ln_1p() / std::f64::consts::LN_2
}

/// Capacity in Mbps of a robot–PoA link given received power and noise.
pub fn channel_capacity(link: &Link, sigma: f64, noise: f64) -> Result<f64, FeasibilityError> {
    if !link.wireless() {
        return Err(FeasibilityError::NotWireless(link.key()));
    }
    Ok(shannon_capacity(link.bandwidth, link.drop, sigma, noise))
}

/// Effective capacity of a wireless link under `radio`.
pub fn wireless_capacity(graph: &HardwareGraph, link: &Link, radio: &RadioState) -> f64 {
    let (robot, poa) = robot_poa(graph, link);
    shannon_capacity(link.bandwidth, link.drop, radio.sigma(robot, poa), radio.noise())
}

/// Mean M/G/1-PS sojourn time 1/(service_rate − arrival), or `None` when the
/// queue is unstable.
pub fn mg1ps_delay(service_rate: f64, arrival: f64) -> Option<f64> {
    (service_rate > arrival).then(|| 1.0 / (service_rate - arrival))
}

/// Processing delay of `vf`: one M/G/1-PS term per incoming VL, with
/// aggregate rate C(v)·μ of the hosting node.
pub fn processing_delay(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    vf: VfId,
    embedding: &Embedding,
) -> Result<f64, FeasibilityError> {
    let spec = service
        .vf(vf)
        .ok_or_else(|| FeasibilityError::Unknown(vf.to_string()))?;
    let host = embedding
        .placement(vf)
        .ok_or(FeasibilityError::UnplacedVf(vf))?;
    let mu = graph
        .node(host)
        .ok_or_else(|| FeasibilityError::Unknown(host.to_string()))?
        .processing_rate();
    let service_rate = spec.compute * mu;
    service.incoming(vf).try_fold(0.0, |acc, vl| {
        mg1ps_delay(service_rate, vl.demand)
            .map(|d| acc + d)
            .ok_or(FeasibilityError::Unstable {
                vf,
                arrival: vl.demand,
                service_rate,
            })
    })
}

/// Sum of d + ψ over the links each VL of the service traverses.
pub fn network_delay(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    embedding: &Embedding,
) -> Result<f64, FeasibilityError> {
    let mut total = 0.0;
    for vl in &service.vls {
        let same_host = matches!(
            (embedding.placement(vl.from), embedding.placement(vl.to)),
            (Some(a), Some(b)) if a == b
        );
        match embedding.route(vl.id()) {
            Some(path) if !path.is_empty() || same_host => total += path_latency(graph, path),
            None if same_host => {}
            _ => return Err(FeasibilityError::UnroutedVl(vl.id())),
        }
    }
    Ok(total)
}

pub(crate) fn path_latency(graph: &HardwareGraph, path: &[NodeId]) -> f64 {
    route_hops(path)
        .filter_map(|k| graph.link(k))
        .map(Link::latency)
        .sum()
}

/// Delay breakdown that skips whatever cannot be evaluated (unplaced VFs,
/// unstable queues, missing routes) instead of failing.
pub fn delay_report(graph: &HardwareGraph, service: &ServiceSpec, embedding: &Embedding) -> DelayReport {
    let network_ms: f64 = service
        .vls
        .iter()
        .filter_map(|vl| embedding.route(vl.id()))
        .map(|p| path_latency(graph, p))
        .sum();
    let processing: Vec<VfDelay> = service
        .vfs
        .iter()
        .filter_map(|v| {
            let host = graph.node(embedding.placement(v.id)?)?;
            let rate = v.compute * host.processing_rate();
            let ms = service
                .incoming(v.id)
                .filter_map(|vl| mg1ps_delay(rate, vl.demand))
                .fold(0.0, |a, b| a + b);
            Some(VfDelay { vf: v.id, ms })
        })
        .collect();
    let total_ms = network_ms + processing.iter().map(|d| d.ms).sum::<f64>();
    DelayReport {
        service: service.id,
        network_ms,
        processing,
        total_ms,
        deadline_ms: service.deadline,
    }
}

/// Edge cost Σₙ κₙ·|a(n)| of all placed VFs.
pub fn objective(graph: &HardwareGraph, embedding: &Embedding) -> f64 {
    embedding
        .placements
        .values()
        .filter_map(|&n| graph.node(n))
        .map(|n| n.cost())
        .sum()
}

/// Evaluate every constraint and list the violations, sorted by kind then location.
pub fn check_embedding(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    embedding: &Embedding,
    radio: &RadioState,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |kind, location, measured, bound| {
        out.push(Violation {
            kind,
            location,
            measured,
            bound,
        })
    };

    // placement and compute
    let mut load: BTreeMap<NodeId, f64> = BTreeMap::new();
    for s in services {
        for vf in &s.vfs {
            match embedding.placement(vf.id) {
                None => push(ViolationKind::VfUnplaced, Location::Vf(vf.id), 0.0, 1.0),
                Some(n) if vf.pin.is_some_and(|p| p != n) => {
                    push(ViolationKind::VfUnplaced, Location::Vf(vf.id), 0.0, 1.0)
                }
                Some(n) => *load.entry(n).or_default() += vf.compute,
            }
        }
    }
    for (&n, &used) in &load {
        let cap = graph.node(n).map_or(0.0, |n| n.compute);
        if exceeds(used, cap) {
            push(ViolationKind::Compute, Location::Node(n), used, cap);
        }
    }

    // valid attachments; robots with none are reported once and skipped by
    // the steering check
    let mut attached: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut robots: BTreeSet<NodeId> = services.iter().filter_map(|s| s.robot(graph)).collect();
    robots.extend(
        embedding
            .attachment
            .keys()
            .copied()
            .filter(|&r| graph.node(r).is_some_and(|n| n.kind == NodeKind::Robot)),
    );
    for &r in &robots {
        match embedding.attachment_of(r) {
            Some(p) if graph.link_between(r, p).is_some_and(Link::wireless) => {
                attached.insert(r, p);
            }
            _ => push(ViolationKind::Attachment, Location::Node(r), 0.0, 1.0),
        }
    }

    // routing
    let mut link_load: BTreeMap<LinkKey, f64> = BTreeMap::new();
    let mut flow_nodes: BTreeSet<NodeId> = BTreeSet::new();
    let mut steer_links: BTreeSet<LinkKey> = BTreeSet::new();
    for s in services {
        for vl in &s.vls {
            let (Some(h1), Some(h2)) = (embedding.placement(vl.from), embedding.placement(vl.to)) else {
                continue;
            };
            let path = embedding.route(vl.id()).unwrap_or(&[]);
            if path.is_empty() {
                if h1 != h2 {
                    push(ViolationKind::VlUnrouted, Location::Vl(vl.id()), 0.0, 1.0);
                }
                continue;
            }
            if path[0] != h1 || path[path.len() - 1] != h2 {
                push(ViolationKind::SteerToVf, Location::Vl(vl.id()), 0.0, 1.0);
            }
            if vl.demand > 0.0 {
                flow_nodes.extend(flow_imbalance(graph, path));
            }
            let hops: BTreeSet<LinkKey> = route_hops(path).filter(|k| graph.link(*k).is_some()).collect();
            for key in hops {
                let link = graph.link(key).expect("filtered");
                if link.wireless() {
                    let (robot, poa) = robot_poa(graph, link);
                    if attached.get(&robot).is_some_and(|&p| p != poa) {
                        steer_links.insert(key);
                    }
                }
                *link_load.entry(key).or_default() += vl.demand;
            }
        }
    }
    for n in flow_nodes {
        push(ViolationKind::Flow, Location::Node(n), 1.0, 0.0);
    }
    for key in steer_links {
        push(ViolationKind::SteerIfAttached, Location::Link(key), 1.0, 0.0);
    }
    for (&key, &used) in &link_load {
        let link = graph.link(key).expect("only existing links are loaded");
        if link.wireless() {
            let cap = wireless_capacity(graph, link, radio);
            if exceeds(used, cap) {
                push(ViolationKind::WirelessCapacity, Location::Link(key), used, cap);
            }
        } else {
            let cap = link.usable_bandwidth();
            if exceeds(used, cap) {
                push(ViolationKind::Bandwidth, Location::Link(key), used, cap);
            }
        }
    }

    // delay and queue stability
    for s in services {
        for vf in &s.vfs {
            let Some(host) = embedding.placement(vf.id).and_then(|n| graph.node(n)) else {
                continue;
            };
            let rate = vf.compute * host.processing_rate();
            let worst = s.incoming(vf.id).map(|vl| vl.demand).fold(None, |m: Option<f64>, d| {
                Some(m.map_or(d, |m| m.max(d)))
            });
            if let Some(arrival) = worst {
                if arrival >= rate {
                    push(ViolationKind::Stability, Location::Vf(vf.id), arrival, rate);
                }
            }
        }
        let report = delay_report(graph, s, embedding);
        if exceeds(report.total_ms, s.deadline) {
            push(ViolationKind::Deadline, Location::Service(s.id), report.total_ms, s.deadline);
        }
    }

    out.sort_by(|a, b| (a.kind, a.location).cmp(&(b.kind, b.location)));
    out
}

/// Nodes where a route breaks flow conservation: every node except the two
/// route ends must forward exactly what it receives over real links.
fn flow_imbalance(graph: &HardwareGraph, path: &[NodeId]) -> BTreeSet<NodeId> {
    let mut net: BTreeMap<NodeId, i64> = path.iter().map(|&n| (n, 0)).collect();
    for w in path.windows(2) {
        if graph.link_between(w[0], w[1]).is_some() {
            *net.get_mut(&w[0]).unwrap() += 1;
            *net.get_mut(&w[1]).unwrap() -= 1;
        }
    }
    let (first, last) = (path[0], path[path.len() - 1]);
    if first != last {
        *net.get_mut(&first).unwrap() -= 1;
        *net.get_mut(&last).unwrap() += 1;
    }
    net.into_iter().filter(|&(_, v)| v != 0).map(|(n, _)| n).collect()
}

pub(crate) fn robot_poa(graph: &HardwareGraph, link: &Link) -> (NodeId, NodeId) {
    if graph.node(link.a).is_some_and(|n| n.kind == NodeKind::Robot) {
        (link.a, link.b)
    } else {
        (link.b, link.a)
    }
}

pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_graph, Node, Tier, VfSpec, VlSpec};

    const R: NodeId = NodeId(0);
    const P1: NodeId = NodeId(1);
    const P2: NodeId = NodeId(2);
    const CLOUD: NodeId = NodeId(3);
    const EDGE: NodeId = NodeId(4);
    const EMPTY: NodeId = NodeId(5);

    fn graph() -> HardwareGraph {
        build_graph(
            vec![
                Node::robot(R, 1.0, 5.0),
                Node::poa(P1),
                Node::poa(P2),
                Node::server(CLOUD, Tier::Cloud, 8.0, 5.0),
                Node::server(EDGE, Tier::NearEdge, 8.0, 5.0),
                Node::server(EMPTY, Tier::Cloud, 0.0, 5.0),
            ],
            vec![
                Link::new(R, P1, 100.0, 0.0),
                Link::new(R, P2, 100.0, 0.0),
                Link::new(P1, CLOUD, 1000.0, 9.0),
                Link::new(P1, EDGE, 1000.0, 3.0),
                Link::new(P1, EMPTY, 1000.0, 5.0),
                Link::new(P2, CLOUD, 1000.0, 27.0).with_queuing(2.0),
            ],
        )
        .unwrap()
    }

    fn radio() -> RadioState {
        RadioState::new(1.0)
            .unwrap()
            .with_sigma(R, P1, 3.0)
            .unwrap()
            .with_sigma(R, P2, 3.0)
            .unwrap()
    }

    fn service(deadline: f64) -> ServiceSpec {
        ServiceSpec {
            id: ServiceId(0),
            vfs: vec![
                VfSpec { id: VfId(1), compute: 1.0, pin: Some(R) },
                VfSpec { id: VfId(2), compute: 4.0, pin: None },
            ],
            vls: vec![VlSpec { from: VfId(1), to: VfId(2), demand: 10.0 }],
            deadline,
        }
    }

    fn on_cloud() -> Embedding {
        let mut e = Embedding::new();
        e.place(VfId(1), R);
        e.place(VfId(2), CLOUD);
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, P1, CLOUD]);
        e.attach(R, P1);
        e
    }

    fn kinds(v: &[Violation]) -> Vec<ViolationKind> {
        v.iter().map(|v| v.kind).collect()
    }

    #[test]
    fn capacity_examples() {
        let g = graph();
        let link = g.link_between(R, P1).unwrap();
        assert!((channel_capacity(link, 3.0, 1.0).unwrap() - 200.0).abs() < 1e-9);
        assert_eq!(channel_capacity(link, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(shannon_capacity(100.0, 1.0, 3.0, 1.0), 0.0);
        assert!((shannon_capacity(100.0, 0.5, 1.0, 1.0) - 50.0).abs() < 1e-9);
        let wired = g.link_between(P1, CLOUD).unwrap();
        assert!(matches!(
            channel_capacity(wired, 3.0, 1.0),
            Err(FeasibilityError::NotWireless(_))
        ));
    }

    #[test]
    fn processing_delay_examples() {
        assert_eq!(mg1ps_delay(2.0, 1.0), Some(1.0));
        assert_eq!(mg1ps_delay(2.0, 2.0), None);
        // two incoming VLs into one VF with C·μ = 4
        let g = graph();
        let mut s = service(15.0);
        s.vfs[1].compute = 0.8; // 0.8 · 5 = 4
        s.vfs.push(VfSpec { id: VfId(3), compute: 1.0, pin: Some(R) });
        s.vls = vec![
            VlSpec { from: VfId(1), to: VfId(2), demand: 1.0 },
            VlSpec { from: VfId(3), to: VfId(2), demand: 2.0 },
        ];
        let mut e = on_cloud();
        e.place(VfId(3), R);
        let d = processing_delay(&g, &s, VfId(2), &e).unwrap();
        assert!((d - (1.0 / 3.0 + 1.0 / 2.0)).abs() < 1e-12);
        assert_eq!(processing_delay(&g, &s, VfId(1), &e).unwrap(), 0.0);
    }

    #[test]
    fn unstable_queue_is_an_error() {
        let g = graph();
        let mut s = service(15.0);
        s.vls[0].demand = 20.0; // C·μ = 4·5 = 20
        assert!(matches!(
            processing_delay(&g, &s, VfId(2), &on_cloud()),
            Err(FeasibilityError::Unstable { .. })
        ));
    }

    #[test]
    fn network_delay_sums_hops() {
        let g = graph();
        let s = service(15.0);
        assert_eq!(network_delay(&g, &s, &on_cloud()).unwrap(), 9.0);
        let mut e = on_cloud();
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, P2, CLOUD]);
        e.attach(R, P2);
        // 27 ms plus 2 ms queuing on the same hop
        assert_eq!(network_delay(&g, &s, &e).unwrap(), 29.0);
        e.routes.clear();
        assert!(matches!(
            network_delay(&g, &s, &e),
            Err(FeasibilityError::UnroutedVl(_))
        ));
    }

    #[test]
    fn feasible_embedding_has_no_violations() {
        let v = check_embedding(&graph(), &[service(15.0)], &on_cloud(), &radio());
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn server_without_capacity() {
        let mut e = on_cloud();
        e.place(VfId(2), EMPTY);
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, P1, EMPTY]);
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::Compute]);
        assert_eq!(v[0].location, Location::Node(EMPTY));
    }

    #[test]
    fn steering_over_unattached_poa() {
        let mut e = on_cloud();
        e.attach(R, P2);
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::SteerIfAttached]);
        assert_eq!(v[0].location, Location::Link(LinkKey::new(R, P1)));
    }

    #[test]
    fn deadline_violation_reports_measured_delay() {
        let mut e = on_cloud();
        e.attach(R, P2);
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, P2, CLOUD]);
        let mut s = service(15.0);
        s.vls[0].demand = 0.0;
        s.vfs[1].compute = 1.0;
        // 27 + 2 ms network, 1/(1·5 − 0) processing
        let v = check_embedding(&graph(), &[s], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::Deadline]);
        assert!((v[0].measured - 29.2).abs() < 1e-12);
        assert_eq!(v[0].bound, 15.0);
    }

    #[test]
    fn wireless_capacity_uses_snr() {
        let weak = RadioState::new(1.0).unwrap().with_sigma(R, P1, 0.01).unwrap();
        let v = check_embedding(&graph(), &[service(15.0)], &on_cloud(), &weak);
        assert_eq!(kinds(&v), vec![ViolationKind::WirelessCapacity]);
    }

    #[test]
    fn missing_attachment_reported_once() {
        let mut e = on_cloud();
        e.attachment.clear();
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::Attachment]);
    }

    #[test]
    fn broken_route_breaks_flow() {
        let mut e = on_cloud();
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, CLOUD]);
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert!(kinds(&v).iter().all(|&k| k == ViolationKind::Flow), "{v:?}");
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn route_to_wrong_server() {
        let mut e = on_cloud();
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, P1, EDGE]);
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::SteerToVf]);
    }

    #[test]
    fn unplaced_and_unrouted() {
        let mut e = on_cloud();
        e.placements.remove(&VfId(2));
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::VfUnplaced]);

        let mut e = on_cloud();
        e.routes.clear();
        let v = check_embedding(&graph(), &[service(15.0)], &e, &radio());
        assert_eq!(kinds(&v), vec![ViolationKind::VlUnrouted]);
    }

    #[test]
    fn intra_node_vl_needs_no_route() {
        let mut s = service(15.0);
        s.vfs.push(VfSpec { id: VfId(3), compute: 1.0, pin: None });
        s.vls.push(VlSpec { from: VfId(2), to: VfId(3), demand: 2.0 });
        let mut e = on_cloud();
        e.place(VfId(3), CLOUD);
        let v = check_embedding(&graph(), &[s.clone()], &e, &radio());
        assert!(v.is_empty(), "{v:?}");
        assert_eq!(network_delay(&graph(), &s, &e).unwrap(), 9.0);
    }

    #[test]
    fn objective_examples() {
        let g = graph();
        assert_eq!(objective(&g, &Embedding::new()), 0.0);
        assert_eq!(objective(&g, &on_cloud()), 1.0);
        let mut e = on_cloud();
        e.place(VfId(7), CLOUD);
        e.place(VfId(8), EDGE);
        assert_eq!(objective(&g, &e), 6.0);
    }

    #[test]
    fn violations_sorted() {
        let mut e = on_cloud();
        e.attachment.clear();
        e.place(VfId(2), EMPTY);
        e.set_route(VlId::new(VfId(1), VfId(2)), vec![R, P1, EMPTY]);
        let v = check_embedding(&graph(), &[service(1.0)], &e, &radio());
        let k = kinds(&v);
        let mut sorted = k.clone();
        sorted.sort();
        assert_eq!(k, sorted);
        assert_eq!(
            k,
            vec![ViolationKind::Compute, ViolationKind::Deadline, ViolationKind::Attachment]
        );
    }
}
