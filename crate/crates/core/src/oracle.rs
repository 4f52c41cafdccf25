//! Exact solver for small instances, plus the bin-packing view of "ideal"
//! services used to cross-check it.
//!
//! The search enumerates attachments, then server placements depth-first with
//! compute and cost-bound pruning, then the `k` lowest-latency paths of every
//! VL. Among feasible embeddings the winner minimises, in order: Edge cost,
//! number of distinct servers used, total delay, the placement vector and the
//! attachment vector.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::feasibility::{check_embedding, delay_report, exceeds, objective};
use crate::model::{
    build_graph, Embedding, HardwareGraph, Link, Node, NodeId, NodeKind, RadioState, ServiceId,
    ServiceSpec, Tier, VfId, VfSpec, VlSpec,
};
use crate::routing::k_shortest_paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Largest number of (attachment, placement) combinations to enumerate.
    pub budget: u64,
    /// Paths tried per VL.
    pub k: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            budget: 10_000_000,
            k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("search space of {size} combinations exceeds the budget of {budget}")]
    BudgetExceeded { size: u64, budget: u64 },
    #[error("no feasible embedding exists")]
    Infeasible,
    #[error("services are not ideal: {0}")]
    NotIdeal(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub embedding: Embedding,
    pub cost: f64,
    pub servers_used: usize,
    pub total_delay: f64,
}

pub fn optimal_solve(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    radio: &RadioState,
) -> Result<OracleSolution, OracleError> {
    optimal_solve_with(graph, services, radio, &OracleOptions::default())
}

pub fn optimal_solve_with(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    radio: &RadioState,
    opts: &OracleOptions,
) -> Result<OracleSolution, OracleError> {
    let servers: Vec<NodeId> = graph.servers().map(|n| n.id).collect();
    let mut fixed = Vec::new();
    let mut free = Vec::new();
    for vf in services.iter().flat_map(|s| &s.vfs) {
        match vf.pin {
            Some(p) => fixed.push((vf.id, p)),
            None => free.push((vf.id, vf.compute)),
        }
    }
    let robots: BTreeSet<NodeId> = services.iter().filter_map(|s| s.robot(graph)).collect();
    let attach_choices: Vec<(NodeId, Vec<NodeId>)> = robots.iter().map(|&r| (r, graph.poas_of(r))).collect();

    let size = attach_choices
        .iter()
        .map(|(_, p)| p.len() as u64)
        .chain(free.iter().map(|_| servers.len() as u64))
        .try_fold(1u64, |acc, n| acc.checked_mul(n))
        .unwrap_or(u64::MAX);
    if size > opts.budget {
        return Err(OracleError::BudgetExceeded {
            size,
            budget: opts.budget,
        });
    }

    let min_cost = servers
        .iter()
        .map(|&n| graph.node(n).unwrap().cost())
        .fold(f64::INFINITY, f64::min);
    let mut search = Search {
        graph,
        services,
        radio,
        k: opts.k,
        servers,
        free,
        min_cost,
        compute: graph.nodes().iter().map(|n| (n.id, n.compute)).collect(),
        vls: services.iter().flat_map(|s| &s.vls).collect(),
        paths: HashMap::new(),
        best: None,
    };
    for (vf, node) in &fixed {
        let c = services.iter().find_map(|s| s.vf(*vf)).unwrap().compute;
        *search.compute.entry(*node).or_insert(0.0) -= c;
    }
    if search.compute.values().any(|&c| exceeds(0.0, c)) {
        return Err(OracleError::Infeasible);
    }

    let mut base = Embedding::new();
    for &(vf, node) in &fixed {
        base.place(vf, node);
    }
    for_each_product(&attach_choices, &mut Vec::new(), &mut |attach| {
        let mut e = base.clone();
        for (&(r, _), &p) in attach_choices.iter().zip(attach) {
            e.attach(r, p);
        }
        search.paths.clear();
        search.place(0, &mut e, 0.0);
    });

    search.best.map(|(key, embedding)| OracleSolution {
        embedding,
        cost: key.cost,
        servers_used: key.servers,
        total_delay: key.delay,
    })
    .ok_or(OracleError::Infeasible)
}

fn for_each_product(choices: &[(NodeId, Vec<NodeId>)], acc: &mut Vec<NodeId>, f: &mut impl FnMut(&[NodeId])) {
    if acc.len() == choices.len() {
        f(acc);
        return;
    }
    for &c in &choices[acc.len()].1 {
        acc.push(c);
        for_each_product(choices, acc, f);
        acc.pop();
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Key {
    cost: f64,
    servers: usize,
    delay: f64,
    placement: Vec<NodeId>,
    attachment: Vec<NodeId>,
}

impl Key {
    fn cmp(&self, other: &Key) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.servers.cmp(&other.servers))
            .then(self.delay.total_cmp(&other.delay))
            .then_with(|| self.placement.cmp(&other.placement))
            .then_with(|| self.attachment.cmp(&other.attachment))
    }
}

struct Search<'a> {
    graph: &'a HardwareGraph,
    services: &'a [ServiceSpec],
    radio: &'a RadioState,
    k: usize,
    servers: Vec<NodeId>,
    free: Vec<(VfId, f64)>,
    min_cost: f64,
    compute: HashMap<NodeId, f64>,
    vls: Vec<&'a VlSpec>,
    // candidate paths per host pair under the current attachment
    paths: HashMap<(NodeId, NodeId), Vec<Vec<NodeId>>>,
    best: Option<(Key, Embedding)>,
}

impl Search<'_> {
    fn place(&mut self, i: usize, e: &mut Embedding, cost: f64) {
        if let Some((best, _)) = &self.best {
            let bound = cost + self.min_cost * (self.free.len() - i) as f64;
            if bound > best.cost + 1e-9 {
                return;
            }
        }
        if i == self.free.len() {
            self.route(0, e);
            return;
        }
        let (vf, c) = self.free[i];
        for si in 0..self.servers.len() {
            let n = self.servers[si];
            let left = self.compute[&n];
            if exceeds(c, left) {
                continue;
            }
            *self.compute.get_mut(&n).unwrap() -= c;
            e.place(vf, n);
            let kappa = self.graph.node(n).unwrap().cost();
            self.place(i + 1, e, cost + kappa);
            e.placements.remove(&vf);
            *self.compute.get_mut(&n).unwrap() += c;
        }
    }

    fn route(&mut self, j: usize, e: &mut Embedding) {
        if j == self.vls.len() {
            self.evaluate(e);
            return;
        }
        let vl = self.vls[j];
        let (a, b) = (e.placement(vl.from).unwrap(), e.placement(vl.to).unwrap());
        if a == b {
            e.set_route(vl.id(), Vec::new());
            self.route(j + 1, e);
            return;
        }
        let options = self.candidate_paths(a, b, e).clone();
        for p in options {
            e.set_route(vl.id(), p);
            self.route(j + 1, e);
        }
        e.routes.remove(&vl.id());
    }

    fn candidate_paths(&mut self, a: NodeId, b: NodeId, e: &Embedding) -> &Vec<Vec<NodeId>> {
        let graph = self.graph;
        let k = self.k;
        self.paths.entry((a, b)).or_insert_with(|| {
            let allowed = |l: &Link| {
                if !l.wireless() {
                    return true;
                }
                let (r, p) = if graph.node(l.a).is_some_and(|n| n.kind == NodeKind::Robot) {
                    (l.a, l.b)
                } else {
                    (l.b, l.a)
                };
                e.attachment_of(r) == Some(p)
            };
            k_shortest_paths(graph, a, b, k, |l| allowed(l).then_some(l.latency()))
                .into_iter()
                .map(|(_, p)| p)
                .collect()
        })
    }

    fn evaluate(&mut self, e: &Embedding) {
        if !check_embedding(self.graph, self.services, e, self.radio).is_empty() {
            return;
        }
        let servers = e
            .placements
            .values()
            .filter(|&&n| self.graph.node(n).is_some_and(Node::is_server))
            .collect::<BTreeSet<_>>()
            .len();
        let key = Key {
            cost: objective(self.graph, e),
            servers,
            delay: self
                .services
                .iter()
                .map(|s| delay_report(self.graph, s, e).total_ms)
                .sum(),
            placement: e.placements.values().copied().collect(),
            attachment: e.attachment.values().copied().collect(),
        };
        if self.best.as_ref().is_none_or(|(b, _)| key.cmp(b) == Ordering::Less) {
            self.best = Some((key, e.clone()));
        }
    }
}

/// Items and uniform bin size of a bin-packing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinPackingInstance {
    pub bin_capacity: f64,
    pub item_sizes: Vec<f64>,
}

/// Map ideal services onto bin packing: the offloaded VF of each service is
/// an item, every server a bin of size `server_capacity`.
///
/// A service is ideal when it has exactly two VFs, the first pinned to a
/// robot and the second free, joined by a single zero-demand VL, with no
/// deadline.
pub fn reduce_to_binpacking(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    server_capacity: f64,
) -> Result<BinPackingInstance, OracleError> {
    let mut items = Vec::with_capacity(services.len());
    for s in services {
        let not_ideal = |why: &str| OracleError::NotIdeal(format!("{}: {why}", s.id));
        let [v1, v2] = s.vfs.as_slice() else {
            return Err(not_ideal("needs exactly two VFs"));
        };
        if !v1
            .pin
            .is_some_and(|p| graph.node(p).is_some_and(|n| n.kind == NodeKind::Robot))
        {
            return Err(not_ideal("first VF must be pinned to a robot"));
        }
        if v2.pin.is_some() {
            return Err(not_ideal("second VF must be free"));
        }
        match s.vls.as_slice() {
            [vl] if vl.from == v1.id && vl.to == v2.id && vl.demand == 0.0 => {}
            _ => return Err(not_ideal("needs one zero-demand VL between its VFs")),
        }
        if s.deadline.is_finite() {
            return Err(not_ideal("deadline must be unbounded"));
        }
        if v2.compute > server_capacity {
            return Err(not_ideal("item larger than a bin"));
        }
        items.push(v2.compute);
    }
    Ok(BinPackingInstance {
        bin_capacity: server_capacity,
        item_sizes: items,
    })
}

/// Exact minimum number of bins, by exhaustive assignment with pruning.
/// Limited to 10 items.
pub fn binpack_bruteforce(instance: &BinPackingInstance) -> Result<usize, OracleError> {
    const MAX_ITEMS: usize = 10;
    let n = instance.item_sizes.len();
    if n > MAX_ITEMS {
        return Err(OracleError::BudgetExceeded {
            size: n as u64,
            budget: MAX_ITEMS as u64,
        });
    }
    if instance.item_sizes.iter().any(|&s| s > instance.bin_capacity) {
        return Err(OracleError::Infeasible);
    }
    let mut best = n;
    let mut bins = Vec::with_capacity(n);
    assign(&instance.item_sizes, instance.bin_capacity, 0, &mut bins, &mut best);
    Ok(best)
}

fn assign(items: &[f64], cap: f64, i: usize, bins: &mut Vec<f64>, best: &mut usize) {
    if bins.len() >= *best && i < items.len() {
        return;
    }
    if i == items.len() {
        *best = (*best).min(bins.len());
        return;
    }
    for b in 0..bins.len() {
        if bins[b] + items[i] <= cap + 1e-9 {
            bins[b] += items[i];
            assign(items, cap, i + 1, bins, best);
            bins[b] -= items[i];
        }
    }
    // one bin per item is always possible, so only strictly better packings are explored
    if bins.len() + 1 < *best {
        bins.push(items[i]);
        assign(items, cap, i + 1, bins, best);
        bins.pop();
    }
}

/// Build an ideal instance: one robot behind one PoA, `servers` Cloud servers
/// of capacity `capacity` each directly linked to the PoA, and one ideal
/// service per entry of `sizes`.
pub fn ideal_instance(sizes: &[f64], servers: usize, capacity: f64) -> (HardwareGraph, Vec<ServiceSpec>, RadioState) {
    let robot = NodeId(0);
    let poa = NodeId(1);
    let mut nodes = vec![Node::robot(robot, 0.0, 1.0), Node::poa(poa)];
    let mut links = vec![Link::new(robot, poa, 100.0, 0.0)];
    for i in 0..servers {
        let id = NodeId(2 + i as u32);
        nodes.push(Node::server(id, Tier::Cloud, capacity, 1.0));
        links.push(Link::new(poa, id, 1000.0, 1.0));
    }
    let graph = build_graph(nodes, links).expect("ideal topology is valid");
    let services = sizes
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let v1 = VfId(2 * i as u32);
            let v2 = VfId(2 * i as u32 + 1);
            ServiceSpec {
                id: ServiceId(i as u32),
                vfs: vec![
                    VfSpec { id: v1, compute: 0.0, pin: Some(robot) },
                    VfSpec { id: v2, compute: c, pin: None },
                ],
                vls: vec![VlSpec { from: v1, to: v2, demand: 0.0 }],
                deadline: f64::INFINITY,
            }
        })
        .collect();
    let radio = RadioState::new(1.0)
        .unwrap()
        .with_sigma(robot, poa, 1.0)
        .unwrap();
    (graph, services, radio)
}
