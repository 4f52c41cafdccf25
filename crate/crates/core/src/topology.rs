//! Random substrates for stress experiments: Erdős–Rényi cores with
//! designated server vertices, PoAs placed at the bundled coordinates and a
//! robot touring them.

use std::collections::VecDeque;
use std::io::Read;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    build_graph, HardwareGraph, Link, Node, NodeId, ServiceId, ServiceSpec, SigmaEntry, Tier, VfId, VfSpec,
    VlSpec,
};
use crate::scenario::{MobilityTrace, RadioSection, Scenario, ScenarioOptions, SignalModel, TracePoint};

const POA_CSV: &str = include_str!("../data/poa_locations.csv");
const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("{0}")]
    Domain(String),
    #[error("no edge probability satisfies the redundancy requirements")]
    EmptyRegion,
    #[error("no valid graph after {0} samples")]
    RejectionLimit(usize),
    #[error("bad PoA location data: {0}")]
    Csv(#[from] csv::Error),
}

/// A PoA site in geographic coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoaLocation {
    pub poa_id: u32,
    pub lat: f64,
    pub lon: f64,
}

/// The 12 bundled PoA sites.
pub fn poa_locations() -> Vec<PoaLocation> {
    read_poa_locations(POA_CSV.as_bytes()).expect("bundled PoA data is valid")
}

pub fn read_poa_locations(reader: impl Read) -> Result<Vec<PoaLocation>, TopologyError> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<Result<Vec<_>, _>>()
        .map_err(Into::into)
}

/// Equirectangular projection to metres, relative to the first site.
pub fn project(locations: &[PoaLocation]) -> Vec<[f64; 2]> {
    let Some(origin) = locations.first() else {
        return Vec::new();
    };
    let cos_lat = origin.lat.to_radians().cos();
    locations
        .iter()
        .map(|l| {
            [
                (l.lon - origin.lon).to_radians() * cos_lat * EARTH_RADIUS_M,
                (l.lat - origin.lat).to_radians() * EARTH_RADIUS_M,
            ]
        })
        .collect()
}

/// Probability that a vertex of G(n, p) has degree `k`.
pub fn degree_pmf(n: usize, p: f64, k: usize) -> Result<f64, TopologyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(TopologyError::Domain(format!("p = {p} is not a probability")));
    }
    if n == 0 || k > n - 1 {
        return Err(TopologyError::Domain(format!("degree {k} impossible with {n} vertices")));
    }
    let m = n - 1;
    let mut choose = 1.0;
    for i in 0..k.min(m - k) {
        choose = choose * (m - i) as f64 / (i + 1) as f64;
    }
    Ok(choose * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32))
}

/// Probability that a vertex of G(n, p) has degree at least `k`.
pub fn degree_tail(n: usize, p: f64, k: usize) -> f64 {
    if n == 0 || k > n - 1 {
        return 0.0;
    }
    (k..n).map(|j| degree_pmf(n, p, j).unwrap_or(0.0)).sum::<f64>().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierRequirement {
    pub count: usize,
    /// Minimum degree of each server of the tier.
    pub links: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierRedundancySpec {
    pub cloud: TierRequirement,
    pub far_edge: TierRequirement,
    pub near_edge: TierRequirement,
}

impl Default for TierRedundancySpec {
    fn default() -> Self {
        Self {
            cloud: TierRequirement { count: 6, links: 6 },
            far_edge: TierRequirement { count: 4, links: 4 },
            near_edge: TierRequirement { count: 2, links: 2 },
        }
    }
}

impl TierRedundancySpec {
    pub fn tiers(&self) -> [(Tier, TierRequirement); 3] {
        [
            (Tier::Cloud, self.cloud),
            (Tier::FarEdge, self.far_edge),
            (Tier::NearEdge, self.near_edge),
        ]
    }

    pub fn servers(&self) -> usize {
        self.cloud.count + self.far_edge.count + self.near_edge.count
    }

    /// Tier and degree requirement of vertex `i`; servers come first.
    fn vertex(&self, i: usize) -> Option<(Tier, usize)> {
        let mut start = 0;
        for (tier, req) in self.tiers() {
            if i < start + req.count {
                return Some((tier, req.links));
            }
            start += req.count;
        }
        None
    }
}

/// Edge probabilities on a 0.001 grid for which every tier's degree
/// requirement holds with probability at least `confidence`, merged into
/// closed intervals.
pub fn feasible_region(
    n: usize,
    spec: &TierRedundancySpec,
    confidence: f64,
) -> Result<Vec<(f64, f64)>, TopologyError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(TopologyError::Domain("confidence must lie in (0, 1)".into()));
    }
    let required = spec.tiers().iter().map(|(_, r)| r.links).max().unwrap_or(0);
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for i in 0..=1000 {
        let p = i as f64 / 1000.0;
        if degree_tail(n, p, required) + 1e-12 >= confidence {
            open = Some(open.map_or((p, p), |(lo, _)| (lo, p)));
        } else if let Some(iv) = open.take() {
            out.push(iv);
        }
    }
    out.extend(open);
    if out.is_empty() {
        Err(TopologyError::EmptyRegion)
    } else {
        Ok(out)
    }
}

/// Edges of a G(n, p) sample as index pairs `(i, j)` with `i < j`.
pub fn sample_gnp(n: usize, p: f64, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Uniform ranges for link attributes of generated graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkProfile {
    pub cloud_delay_ms: (f64, f64),
    pub far_edge_delay_ms: (f64, f64),
    pub near_edge_delay_ms: (f64, f64),
    pub switch_delay_ms: (f64, f64),
    pub poa_delay_ms: (f64, f64),
    pub bandwidth_mbps: (f64, f64),
    pub wireless_bandwidth_mbps: f64,
}

impl Default for LinkProfile {
    fn default() -> Self {
        Self {
            cloud_delay_ms: (8.0, 16.0),
            far_edge_delay_ms: (3.0, 6.0),
            near_edge_delay_ms: (1.0, 2.0),
            switch_delay_ms: (0.5, 2.0),
            poa_delay_ms: (0.5, 1.5),
            bandwidth_mbps: (100.0, 1000.0),
            wireless_bandwidth_mbps: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyParams {
    pub n: usize,
    pub p: f64,
    pub spec: TierRedundancySpec,
    pub profile: LinkProfile,
    pub max_resamples: usize,
    pub cloud_compute: f64,
    pub far_edge_compute: f64,
    pub near_edge_compute: f64,
    pub server_mu: f64,
    pub robot_compute: f64,
    pub robot_mu: f64,
}

impl TopologyParams {
    pub fn new(n: usize, p: f64) -> Self {
        Self {
            n,
            p,
            spec: TierRedundancySpec::default(),
            profile: LinkProfile::default(),
            max_resamples: 1000,
            cloud_compute: 64.0,
            far_edge_compute: 32.0,
            near_edge_compute: 16.0,
            server_mu: 100.0,
            robot_compute: 1.0,
            robot_mu: 100.0,
        }
    }

    fn compute(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Cloud => self.cloud_compute,
            Tier::FarEdge => self.far_edge_compute,
            Tier::NearEdge => self.near_edge_compute,
        }
    }
}

/// A generated substrate and the ids of its robot and PoAs.
#[derive(Debug, Clone)]
pub struct Topology {
    pub graph: HardwareGraph,
    pub robot: NodeId,
    pub poas: Vec<NodeId>,
}

/// Sample a graph with default attributes.
pub fn generate(n: usize, p: f64, spec: &TierRedundancySpec, seed: u64) -> Result<HardwareGraph, TopologyError> {
    let params = TopologyParams {
        spec: *spec,
        ..TopologyParams::new(n, p)
    };
    Ok(generate_with(&params, seed)?.graph)
}

/// Vertices `0..n` form the G(n, p) core: the first ones are the servers
/// (Cloud, then far Edge, then near Edge), the rest switches. The PoAs follow
/// as `n..n+12`, each wired to a random switch, and the robot is `n + 12`
/// with a wireless link to every PoA. Samples are drawn until every server
/// meets its degree requirement and every PoA reaches every server.
pub fn generate_with(params: &TopologyParams, seed: u64) -> Result<Topology, TopologyError> {
    let n = params.n;
    let servers = params.spec.servers();
    if n <= servers {
        return Err(TopologyError::Domain(format!(
            "{n} vertices leave no room for switches besides {servers} servers"
        )));
    }
    if !(0.0..=1.0).contains(&params.p) {
        return Err(TopologyError::Domain(format!("p = {} is not a probability", params.p)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = project(&poa_locations());
    for attempt in 0..params.max_resamples {
        let edges = sample_gnp(n, params.p, &mut rng);
        let Some(poa_switches) = accept(params, &edges, sites.len(), &mut rng) else {
            continue;
        };
        log::debug!("topology accepted after {} samples", attempt + 1);
        return Ok(assemble(params, &edges, &poa_switches, &sites, &mut rng));
    }
    Err(TopologyError::RejectionLimit(params.max_resamples))
}

// Degree audit and forwarding reachability; returns the switch of each PoA.
fn accept(params: &TopologyParams, edges: &[(usize, usize)], poas: usize, rng: &mut impl Rng) -> Option<Vec<usize>> {
    let n = params.n;
    let servers = params.spec.servers();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for (i, nbrs) in adj.iter().enumerate().take(servers) {
        let (_, links) = params.spec.vertex(i).unwrap();
        if nbrs.len() < links {
            return None;
        }
    }
    // largest component of the switch-only subgraph
    let mut comp = vec![usize::MAX; n];
    let mut best: (usize, usize) = (0, usize::MAX);
    for s in servers..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([s]);
        comp[s] = s;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &adj[u] {
                if v >= servers && comp[v] == usize::MAX {
                    comp[v] = s;
                    queue.push_back(v);
                }
            }
        }
        if size > best.0 {
            best = (size, s);
        }
    }
    let main = best.1;
    // every non-robot vertex must hang off the main switch component
    for (i, nbrs) in adj.iter().enumerate() {
        let attached = if i < servers {
            nbrs.iter().any(|&v| v >= servers && comp[v] == main)
        } else {
            comp[i] == main
        };
        if !attached {
            return None;
        }
    }
    let switches: Vec<usize> = (servers..n).collect();
    Some((0..poas).map(|_| *switches.choose(rng).unwrap()).collect())
}

fn assemble(
    params: &TopologyParams,
    edges: &[(usize, usize)],
    poa_switches: &[usize],
    sites: &[[f64; 2]],
    rng: &mut impl Rng,
) -> Topology {
    let n = params.n;
    let prof = &params.profile;
    let mut nodes = Vec::with_capacity(n + sites.len() + 1);
    let tier_of = |i: usize| params.spec.vertex(i).map(|(t, _)| t);
    for i in 0..n {
        let id = NodeId(i as u32);
        nodes.push(match tier_of(i) {
            Some(t) => Node::server(id, t, params.compute(t), params.server_mu),
            None => Node::switch(id),
        });
    }
    let mut draw = |range: (f64, f64)| {
        if range.1 > range.0 {
            rng.random_range(range.0..=range.1)
        } else {
            range.0
        }
    };
    let mut links = Vec::with_capacity(edges.len() + 2 * sites.len());
    for &(a, b) in edges {
        // the outermost tier at either end decides the delay range
        let tier = tier_of(a).into_iter().chain(tier_of(b)).max();
        let delay = draw(match tier {
            Some(Tier::Cloud) => prof.cloud_delay_ms,
            Some(Tier::FarEdge) => prof.far_edge_delay_ms,
            Some(Tier::NearEdge) => prof.near_edge_delay_ms,
            None => prof.switch_delay_ms,
        });
        let bw = draw(prof.bandwidth_mbps);
        links.push(Link::new(NodeId(a as u32), NodeId(b as u32), bw, delay));
    }
    let robot = NodeId((n + sites.len()) as u32);
    let mut poas = Vec::with_capacity(sites.len());
    for (j, (&sw, &[x, y])) in poa_switches.iter().zip(sites).enumerate() {
        let id = NodeId((n + j) as u32);
        poas.push(id);
        nodes.push(Node::poa(id).with_position(x, y));
        let delay = draw(prof.poa_delay_ms);
        let bw = draw(prof.bandwidth_mbps);
        links.push(Link::new(id, NodeId(sw as u32), bw, delay));
        links.push(Link::new(robot, id, prof.wireless_bandwidth_mbps, 0.0));
    }
    nodes.push(Node::robot(robot, params.robot_compute, params.robot_mu));
    let graph = build_graph(nodes, links).expect("accepted samples are connected");
    Topology { graph, robot, poas }
}

/// The stress-test service: a robot-resident driver feeding a chain of three
/// offloadable VFs.
pub fn stress_service(robot: NodeId) -> ServiceSpec {
    let vf = |i: u32, compute: f64, pin: Option<NodeId>| VfSpec { id: VfId(i), compute, pin };
    let vl = |a: u32, b: u32, demand: f64| VlSpec { from: VfId(a), to: VfId(b), demand };
    ServiceSpec {
        id: ServiceId(0),
        vfs: vec![vf(1, 1.0, Some(robot)), vf(2, 2.0, None), vf(3, 2.0, None), vf(4, 2.0, None)],
        vls: vec![vl(1, 2, 60.0), vl(2, 3, 40.0), vl(3, 4, 20.0)],
        deadline: 15.0,
    }
}

/// Signal model used with generated graphs.
pub fn stress_signal() -> SignalModel {
    SignalModel::PathLoss {
        reference_power: 1.0e7,
        exponent: 3.0,
        reference_distance_m: 1.0,
        shadowing_db: 0.0,
    }
}

/// A tour visiting every PoA in order and returning to the first, with
/// `steps_per_segment` one-second steps between consecutive PoAs.
pub fn tour(graph: &HardwareGraph, robot: NodeId, poas: &[NodeId], steps_per_segment: usize) -> MobilityTrace {
    let at: Vec<[f64; 2]> = poas
        .iter()
        .map(|&p| graph.node(p).and_then(|n| n.position).unwrap_or([0.0, 0.0]))
        .collect();
    let steps = steps_per_segment.max(1);
    let mut points = Vec::new();
    for (i, &a) in at.iter().enumerate() {
        let b = at[(i + 1) % at.len()];
        for s in 0..steps {
            let f = s as f64 / steps as f64;
            points.push([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]);
        }
    }
    points.push(at[0]);
    MobilityTrace {
        robot,
        step_s: 1.0,
        points: points
            .into_iter()
            .enumerate()
            .map(|(t, position)| TracePoint { t: t as f64, position })
            .collect(),
    }
}

/// A complete stress scenario: generated graph, stress service, tour and
/// path-loss signal.
pub fn stress_scenario(params: &TopologyParams, seed: u64, steps_per_segment: usize) -> Result<Scenario, TopologyError> {
    let topo = generate_with(params, seed)?;
    let trace = tour(&topo.graph, topo.robot, &topo.poas, steps_per_segment);
    Ok(Scenario {
        name: Some(format!("gnp-n{}-p{}-seed{seed}", params.n, params.p)),
        nodes: topo.graph.nodes().to_vec(),
        links: topo.graph.links().to_vec(),
        services: vec![stress_service(topo.robot)],
        radio: RadioSection {
            noise: 1.0,
            sigma: Vec::<SigmaEntry>::new(),
            signal: Some(stress_signal()),
        },
        trace: Some(trace),
        options: ScenarioOptions::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sites() {
        let locs = poa_locations();
        assert_eq!(locs.len(), 12);
        let xy = project(&locs);
        assert_eq!(xy[0], [0.0, 0.0]);
        // neighbouring sites are a few hundred metres apart
        let d = ((xy[1][0] - xy[0][0]).powi(2) + (xy[1][1] - xy[0][1]).powi(2)).sqrt();
        assert!((200.0..400.0).contains(&d), "{d}");
    }

    #[test]
    fn pmf_small_cases() {
        assert!((degree_pmf(2, 0.5, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((degree_pmf(2, 0.5, 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(degree_pmf(5, 0.0, 0).unwrap(), 1.0);
        assert_eq!(degree_pmf(5, 1.0, 4).unwrap(), 1.0);
        assert!(degree_pmf(5, 1.5, 1).is_err());
        assert!(degree_pmf(5, 0.5, 5).is_err());
    }

    #[test]
    fn region_extremes() {
        let zero = TierRequirement { count: 1, links: 0 };
        let spec = TierRedundancySpec {
            cloud: zero,
            far_edge: zero,
            near_edge: zero,
        };
        assert_eq!(feasible_region(10, &spec, 0.9).unwrap(), vec![(0.0, 1.0)]);
        let full = TierRedundancySpec {
            cloud: TierRequirement { count: 1, links: 10 },
            ..spec
        };
        assert!(matches!(feasible_region(10, &full, 0.9), Err(TopologyError::EmptyRegion)));
    }

    #[test]
    fn generation_is_deterministic() {
        let params = TopologyParams::new(48, 0.25);
        let a = generate_with(&params, 11).unwrap();
        let b = generate_with(&params, 11).unwrap();
        assert_eq!(a.graph.nodes(), b.graph.nodes());
        assert_eq!(a.graph.links(), b.graph.links());
        assert_eq!(a.graph.servers().count(), 12);
        assert_eq!(a.poas.len(), 12);
    }

    #[test]
    fn sparse_graphs_are_rejected() {
        let params = TopologyParams {
            max_resamples: 20,
            ..TopologyParams::new(48, 0.02)
        };
        assert!(matches!(generate_with(&params, 1), Err(TopologyError::RejectionLimit(20))));
    }

    #[test]
    fn tour_visits_every_poa() {
        let params = TopologyParams::new(48, 0.25);
        let t = generate_with(&params, 3).unwrap();
        let trace = tour(&t.graph, t.robot, &t.poas, 5);
        assert_eq!(trace.points.len(), 61);
        for (i, &p) in t.poas.iter().enumerate() {
            assert_eq!(Some(trace.points[5 * i].position), t.graph.node(p).unwrap().position);
        }
    }
}
