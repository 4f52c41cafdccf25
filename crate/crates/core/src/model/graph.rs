use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModelError, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Robot,
    Poa,
    Switch,
    Server,
}

/// Server tier, ordered from the robot outwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    NearEdge,
    FarEdge,
    Cloud,
}

impl Tier {
    /// Cost used when a server does not carry an explicit one.
    pub fn default_cost(self) -> f64 {
        match self {
            Tier::Cloud => 1.0,
            Tier::FarEdge => 2.0,
            Tier::NearEdge => 4.0,
        }
    }

    pub fn is_edge(self) -> bool {
        !matches!(self, Tier::Cloud)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<Tier>,
    /// CPU units available for VFs.
    #[serde(default)]
    pub compute: f64,
    /// Explicit cost; falls back to the tier default for servers and 0 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    /// Processing rate per CPU unit, requests per ms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Planar position in metres, used by path-loss signal models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
    /// Per-PoA transmit reference power overriding the signal model's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power: Option<f64>,
}

impl Node {
    fn bare(id: NodeId, kind: NodeKind) -> Self {
        Self {
            id,
            kind,
            tier: None,
            compute: 0.0,
            cost: None,
            mu: None,
            position: None,
            tx_power: None,
        }
    }

    pub fn robot(id: NodeId, compute: f64, mu: f64) -> Self {
        Self {
            compute,
            mu: Some(mu),
            ..Self::bare(id, NodeKind::Robot)
        }
    }

    pub fn poa(id: NodeId) -> Self {
        Self::bare(id, NodeKind::Poa)
    }

    pub fn switch(id: NodeId) -> Self {
        Self::bare(id, NodeKind::Switch)
    }

    pub fn server(id: NodeId, tier: Tier, compute: f64, mu: f64) -> Self {
        Self {
            tier: Some(tier),
            compute,
            mu: Some(mu),
            ..Self::bare(id, NodeKind::Server)
        }
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = Some(cost);
        self
    }

    pub fn with_position(mut self, x: f64, y: f64) -> Self {
        self.position = Some([x, y]);
        self
    }

    pub fn with_tx_power(mut self, power: f64) -> Self {
        self.tx_power = Some(power);
        self
    }

    /// The cost κ charged per hosted VF.
    pub fn cost(&self) -> f64 {
        match (self.kind, self.cost, self.tier) {
            (NodeKind::Server, Some(c), _) => c,
            (NodeKind::Server, None, Some(t)) => t.default_cost(),
            _ => 0.0,
        }
    }

    pub fn processing_rate(&self) -> f64 {
        self.mu.unwrap_or(0.0)
    }

    /// Only switches and PoAs relay traffic; robots and servers are endpoints.
    pub fn forwards(&self) -> bool {
        matches!(self.kind, NodeKind::Switch | NodeKind::Poa)
    }

    pub fn is_server(&self) -> bool {
        self.kind == NodeKind::Server
    }

    pub fn is_edge_server(&self) -> bool {
        self.kind == NodeKind::Server && self.tier.is_some_and(Tier::is_edge)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    #[serde(rename = "bandwidth_mbps")]
    pub bandwidth: f64,
    #[serde(rename = "delay_ms")]
    pub delay: f64,
    #[serde(rename = "queuing_ms", default)]
    pub queuing: f64,
    #[serde(default)]
    pub drop: f64,
    #[serde(skip)]
    wireless: bool,
}

impl Link {
    pub fn new(a: NodeId, b: NodeId, bandwidth: f64, delay: f64) -> Self {
        Self {
            a,
            b,
            bandwidth,
            delay,
            queuing: 0.0,
            drop: 0.0,
            wireless: false,
        }
    }

    pub fn with_queuing(mut self, queuing: f64) -> Self {
        self.queuing = queuing;
        self
    }

    pub fn with_drop(mut self, drop: f64) -> Self {
        self.drop = drop;
        self
    }

    /// True iff the link joins a robot and a PoA. Only meaningful for links
    /// obtained from a [`HardwareGraph`].
    pub fn wireless(&self) -> bool {
        self.wireless
    }

    pub fn key(&self) -> LinkKey {
        LinkKey::new(self.a, self.b)
    }

    /// Bandwidth usable under the link's drop rate, (1 - δ)·λ.
    pub fn usable_bandwidth(&self) -> f64 {
        (1.0 - self.drop) * self.bandwidth
    }

    pub fn latency(&self) -> f64 {
        self.delay + self.queuing
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Unordered pair of link endpoints, normalised so that `.0 <= .1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkKey(pub NodeId, pub NodeId);

impl LinkKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }
}

impl fmt::Display for LinkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// The substrate graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct HardwareGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    index: HashMap<NodeId, usize>,
    pairs: HashMap<(usize, usize), usize>,
    // (neighbour index, link index), sorted by neighbour id
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// Validate nodes and links and build the graph.
pub fn build_graph(nodes: Vec<Node>, links: Vec<Link>) -> Result<HardwareGraph, ModelError> {
    let mut nodes = nodes;
    nodes.sort_by_key(|n| n.id);
    for pair in nodes.windows(2) {
        if pair[0].id == pair[1].id {
            return Err(ModelError::DuplicateId(pair[0].id.to_string()));
        }
    }
    for node in &nodes {
        validate_node(node)?;
    }
    check_cost_monotone(&nodes)?;

    let index: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut pairs = HashMap::new();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    let mut links = links;
    for (li, link) in links.iter_mut().enumerate() {
        let (Some(&ia), Some(&ib)) = (index.get(&link.a), index.get(&link.b)) else {
            return Err(ModelError::DanglingEndpoint {
                a: link.a,
                b: link.b,
            });
        };
        let invalid = |reason: &str| ModelError::InvalidLink {
            a: link.a,
            b: link.b,
            reason: reason.to_string(),
        };
        if ia == ib {
            return Err(invalid("self loop"));
        }
        if !(link.bandwidth > 0.0) || !link.bandwidth.is_finite() {
            return Err(invalid("bandwidth must be positive"));
        }
        if !(link.delay >= 0.0) || !(link.queuing >= 0.0) {
            return Err(invalid("delay and queuing must be non-negative"));
        }
        if !(0.0..=1.0).contains(&link.drop) {
            return Err(invalid("drop rate must lie in [0, 1]"));
        }
        let (ka, kb) = (nodes[ia].kind, nodes[ib].kind);
        let robot_end = ka == NodeKind::Robot || kb == NodeKind::Robot;
        link.wireless = matches!(
            (ka, kb),
            (NodeKind::Robot, NodeKind::Poa) | (NodeKind::Poa, NodeKind::Robot)
        );
        if robot_end && !link.wireless {
            return Err(invalid("robots only connect to PoAs"));
        }
        let key = (ia.min(ib), ia.max(ib));
        if pairs.insert(key, li).is_some() {
            return Err(ModelError::DuplicateId(format!("link {}", link.key())));
        }
        adjacency[ia].push((ib, li));
        adjacency[ib].push((ia, li));
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|&(n, _)| n);
    }

    let graph = HardwareGraph {
        nodes,
        links,
        index,
        pairs,
        adjacency,
    };
    graph.check_connectivity()?;
    Ok(graph)
}

fn validate_node(node: &Node) -> Result<(), ModelError> {
    let invalid = |reason: &str| ModelError::InvalidNode {
        id: node.id,
        reason: reason.to_string(),
    };
    if !(node.compute >= 0.0) {
        return Err(invalid("compute capacity must be non-negative"));
    }
    if node.cost.is_some_and(|c| !(c >= 0.0)) {
        return Err(invalid("cost must be non-negative"));
    }
    match node.kind {
        NodeKind::Server => {
            if node.tier.is_none() {
                return Err(invalid("servers need a tier"));
            }
        }
        _ if node.tier.is_some() => return Err(invalid("only servers carry a tier")),
        _ => {}
    }
    match node.kind {
        NodeKind::Poa | NodeKind::Switch => {
            if node.compute != 0.0 {
                return Err(invalid("switches and PoAs host no VFs"));
            }
        }
        NodeKind::Robot | NodeKind::Server => {
            if !node.mu.is_some_and(|mu| mu > 0.0) {
                return Err(invalid("processing rate must be positive"));
            }
        }
    }
    Ok(())
}

fn check_cost_monotone(nodes: &[Node]) -> Result<(), ModelError> {
    let range = |tier: Tier| {
        nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Server && n.tier == Some(tier))
            .map(Node::cost)
            .fold(None, |acc: Option<(f64, f64)>, c| match acc {
                None => Some((c, c)),
                Some((lo, hi)) => Some((lo.min(c), hi.max(c))),
            })
    };
    let tiers = [range(Tier::NearEdge), range(Tier::FarEdge), range(Tier::Cloud)];
    let present: Vec<(f64, f64)> = tiers.into_iter().flatten().collect();
    for pair in present.windows(2) {
        // lowest cost of the inner tier must not undercut the outer tier
        if pair[0].0 < pair[1].1 {
            return Err(ModelError::CostNotTierMonotone);
        }
    }
    Ok(())
}

impl HardwareGraph {
    fn check_connectivity(&self) -> Result<(), ModelError> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind == NodeKind::Robot
                && !self.adjacency[i].iter().any(|&(_, l)| self.links[l].wireless)
            {
                return Err(ModelError::RobotWithoutPoa(node.id));
            }
        }
        let core: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind != NodeKind::Robot)
            .collect();
        let Some(&start) = core.first() else {
            return Ok(());
        };
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] && self.nodes[v].kind != NodeKind::Robot {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if core.iter().all(|&i| seen[i]) {
            Ok(())
        } else {
            Err(ModelError::DisconnectedCore)
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn link(&self, key: LinkKey) -> Option<&Link> {
        self.link_index(key.0, key.1).map(|i| &self.links[i])
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<&Link> {
        self.link_index(a, b).map(|i| &self.links[i])
    }

    /// Neighbours of `id` with the connecting link, in ascending neighbour id.
    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = (NodeId, &Link)> + '_ {
        let adj = self.index.get(&id).map(|&i| self.adjacency[i].as_slice()).unwrap_or(&[]);
        adj.iter().map(|&(n, l)| (self.nodes[n].id, &self.links[l]))
    }

    pub fn servers(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Server)
    }

    pub fn robots(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Robot)
    }

    /// PoAs that `robot` has a wireless link to, ascending by id.
    pub fn poas_of(&self, robot: NodeId) -> Vec<NodeId> {
        self.neighbors(robot)
            .filter(|(_, l)| l.wireless)
            .map(|(n, _)| n)
            .collect()
    }

    /// Total compute of Edge-tier (near and far) servers.
    pub fn edge_compute(&self) -> f64 {
        self.nodes.iter().filter(|n| n.is_edge_server()).map(|n| n.compute).sum()
    }

    /// Copy of the graph with a uniform fraction of every link's bandwidth and
    /// every server's compute reserved by background load. Robots keep their
    /// own compute.
    pub fn stressed(&self, level: f64) -> HardwareGraph {
        let keep = (1.0 - level).clamp(0.0, 1.0);
        let mut g = self.clone();
        for n in g.nodes.iter_mut().filter(|n| n.is_server()) {
            n.compute *= keep;
        }
        for l in &mut g.links {
            l.bandwidth *= keep;
        }
        g
    }

    // index-level accessors used by the routing code

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    pub(crate) fn idx(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn node_at(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub(crate) fn link_at(&self, i: usize) -> &Link {
        &self.links[i]
    }

    pub(crate) fn adjacency(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub(crate) fn link_index(&self, a: NodeId, b: NodeId) -> Option<usize> {
        let (ia, ib) = (self.idx(a)?, self.idx(b)?);
        self.pairs.get(&(ia.min(ib), ia.max(ib))).copied()
    }
}
