//! Greedy latency- and radio-aware placement.
//!
//! For every robot the PoAs whose wireless capacity can carry the first VL are
//! kept and ranked by `1/T + d`. Through the best-ranked PoA, each unpinned VF
//! in chain order goes to the server with the smallest
//! `τ = κ + Σ (α/λ + d + ψ)` measured from the previous VF's host, skipping
//! candidates that would overload compute or bandwidth, destabilise the
//! queue, or break the deadline. When no server fits the next PoA is tried.

use thiserror::Error;

use crate::feasibility::{check_embedding, exceeds, mg1ps_delay, path_latency, Violation};
use crate::model::{Embedding, HardwareGraph, Link, LinkKey, NodeId, RadioState, ServiceId, ServiceSpec, VfId, VlId, VlSpec};
use crate::routing::{link_capacity, shortest_paths, PathTree, Residual};

pub use crate::routing::CapacityMode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DlmdOptions {
    /// Weight of the inverse-bandwidth term in the path metric.
    pub alpha: f64,
    pub capacity_mode: CapacityMode,
    /// Run the full constraint check on the result.
    pub verify: bool,
}

impl Default for DlmdOptions {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            capacity_mode: CapacityMode::Effective,
            verify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DlmdError {
    #[error("robot {0} has no PoA with enough wireless capacity")]
    NoCoverage(NodeId),
    #[error("no server can host {0} within the constraints")]
    NoFeasiblePlacement(VfId),
    #[error("embedding violates {} constraint(s)", .0.len())]
    Infeasible(Vec<Violation>),
    #[error("service {0} has no VF pinned to a robot")]
    NoRobot(ServiceId),
}

/// A server reachable from the anchor with its τ and the path that reaches it.
#[derive(Debug, Clone, PartialEq)]
pub struct TauCandidate {
    pub node: NodeId,
    pub tau: f64,
    pub path: Vec<NodeId>,
}

/// PoAs of `robot` whose effective capacity is positive and covers `demand`,
/// ascending by id.
pub fn prune_poas(
    graph: &HardwareGraph,
    robot: NodeId,
    demand: f64,
    radio: &RadioState,
) -> Result<Vec<NodeId>, DlmdError> {
    let kept = prune_by(graph, robot, demand, |l| {
        link_capacity(graph, l, radio, CapacityMode::Effective)
    });
    if kept.is_empty() {
        Err(DlmdError::NoCoverage(robot))
    } else {
        Ok(kept)
    }
}

fn prune_by(graph: &HardwareGraph, robot: NodeId, demand: f64, cap: impl Fn(&Link) -> f64) -> Vec<NodeId> {
    graph
        .neighbors(robot)
        .filter(|(_, l)| l.wireless())
        .filter(|(_, l)| {
            let t = cap(l);
            t > 0.0 && !exceeds(demand, t)
        })
        .map(|(n, _)| n)
        .collect()
}

/// The pruned PoA minimising `1/T + d`, ties by id.
pub fn select_poa(
    graph: &HardwareGraph,
    robot: NodeId,
    pruned: &[NodeId],
    radio: &RadioState,
) -> Result<NodeId, DlmdError> {
    rank_poas(graph, robot, pruned, |l| {
        link_capacity(graph, l, radio, CapacityMode::Effective)
    })
    .first()
    .copied()
    .ok_or(DlmdError::NoCoverage(robot))
}

fn rank_poas(graph: &HardwareGraph, robot: NodeId, pruned: &[NodeId], cap: impl Fn(&Link) -> f64) -> Vec<NodeId> {
    let mut scored: Vec<(f64, NodeId)> = pruned
        .iter()
        .filter_map(|&p| {
            let l = graph.link_between(robot, p)?;
            Some((1.0 / cap(l) + l.delay, p))
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, p)| p).collect()
}

/// τ for every reachable candidate from `anchor` with link weight
/// `1/λ + d + ψ`, ascending by (τ, id).
pub fn tau_candidates(graph: &HardwareGraph, anchor: NodeId, candidates: &[NodeId]) -> Vec<TauCandidate> {
    let tree = shortest_paths(graph, anchor, |l| Some(1.0 / l.bandwidth + l.latency()));
    rank_candidates(graph, &tree, candidates.iter().copied())
}

fn rank_candidates(
    graph: &HardwareGraph,
    tree: &PathTree,
    candidates: impl Iterator<Item = NodeId>,
) -> Vec<TauCandidate> {
    let mut out: Vec<TauCandidate> = candidates
        .filter_map(|n| {
            let node = graph.node(n)?;
            Some(TauCandidate {
                node: n,
                tau: node.cost() + tree.distance(graph, n)?,
                path: tree.path(graph, n)?,
            })
        })
        .collect();
    out.sort_by(|a, b| a.tau.total_cmp(&b.tau).then(a.node.cmp(&b.node)));
    out
}

/// Embed one service for `robot` with default options.
pub fn place_service(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    robot: NodeId,
    radio: &RadioState,
) -> Result<Embedding, DlmdError> {
    place_service_with(graph, service, robot, radio, &DlmdOptions::default())
}

pub fn place_service_with(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    robot: NodeId,
    radio: &RadioState,
    opts: &DlmdOptions,
) -> Result<Embedding, DlmdError> {
    let mut residual = Residual::new(graph, radio, opts.capacity_mode);
    let e = place_into(graph, service, robot, radio, opts, &mut residual, None)?;
    if opts.verify {
        verify(graph, std::slice::from_ref(service), &e, radio)?;
    }
    Ok(e)
}

/// Embed services one after another, each on the capacity the previous ones
/// left. A robot keeps the PoA chosen for its first service.
pub fn place_services(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    radio: &RadioState,
    opts: &DlmdOptions,
) -> Result<Embedding, DlmdError> {
    let mut residual = Residual::new(graph, radio, opts.capacity_mode);
    let mut out = Embedding::new();
    for s in services {
        let robot = s.robot(graph).ok_or(DlmdError::NoRobot(s.id))?;
        let fixed = out.attachment_of(robot);
        let e = place_into(graph, s, robot, radio, opts, &mut residual, fixed)?;
        out.merge(e);
    }
    if opts.verify {
        verify(graph, services, &out, radio)?;
    }
    Ok(out)
}

fn verify(graph: &HardwareGraph, services: &[ServiceSpec], e: &Embedding, radio: &RadioState) -> Result<(), DlmdError> {
    let v = check_embedding(graph, services, e, radio);
    if v.is_empty() {
        Ok(())
    } else {
        Err(DlmdError::Infeasible(v))
    }
}

fn place_into(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    robot: NodeId,
    radio: &RadioState,
    opts: &DlmdOptions,
    residual: &mut Residual,
    fixed_poa: Option<NodeId>,
) -> Result<Embedding, DlmdError> {
    let cap = |l: &Link| residual.capacity(graph, l.key());
    let order = match fixed_poa {
        Some(p) => vec![p],
        None => {
            let pruned = prune_by(graph, robot, service.first_vl_demand(), cap);
            rank_poas(graph, robot, &pruned, cap)
        }
    };
    let mut first_err = None;
    for poa in order {
        let mut attempt = Attempt {
            graph,
            radio,
            opts,
            service,
            robot,
            poa,
            residual: residual.clone(),
            embedding: Embedding::new(),
            delay: 0.0,
        };
        match attempt.run() {
            Ok(()) => {
                *residual = attempt.residual;
                return Ok(attempt.embedding);
            }
            Err(e) => {
                log::debug!("{}: placement through {poa} failed: {e}", service.id);
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.unwrap_or(DlmdError::NoCoverage(robot)))
}

struct Attempt<'a> {
    graph: &'a HardwareGraph,
    radio: &'a RadioState,
    opts: &'a DlmdOptions,
    service: &'a ServiceSpec,
    robot: NodeId,
    poa: NodeId,
    residual: Residual,
    embedding: Embedding,
    // accumulated end-to-end delay of everything placed so far
    delay: f64,
}

impl Attempt<'_> {
    fn run(&mut self) -> Result<(), DlmdError> {
        let s = self.service;
        self.embedding.attach(self.robot, self.poa);
        for vf in s.vfs.iter().filter(|v| v.pin.is_some()) {
            let host = vf.pin.unwrap();
            let fail = DlmdError::NoFeasiblePlacement(vf.id);
            if exceeds(vf.compute, self.residual.compute(self.graph, host)) {
                return Err(fail);
            }
            let proc = self.processing(vf.id, host).ok_or(fail)?;
            self.residual.reserve_compute(self.graph, host, vf.compute);
            self.embedding.place(vf.id, host);
            self.delay += proc;
        }
        for vl in &s.vls {
            if s.is_pinned(vl.from) && s.is_pinned(vl.to) {
                let (a, b) = self.hosts(vl).unwrap();
                let path = self.route(a, b, vl.demand).ok_or(DlmdError::NoFeasiblePlacement(vl.to))?;
                self.commit_route(vl, path);
            }
        }
        if exceeds(self.delay, s.deadline) {
            return Err(DlmdError::NoFeasiblePlacement(s.vfs[0].id));
        }
        for vf in s.vfs.iter().filter(|v| v.pin.is_none()) {
            self.place_vf(vf.id, vf.compute)?;
        }
        Ok(())
    }

    fn place_vf(&mut self, vf: VfId, compute: f64) -> Result<(), DlmdError> {
        let s = self.service;
        let anchor_vl = s
            .incoming(vf)
            .find(|vl| self.embedding.placement(vl.from).is_some());
        let anchor = anchor_vl
            .map(|vl| self.embedding.placement(vl.from).unwrap())
            .unwrap_or(self.robot);
        let demand = anchor_vl.map_or(0.0, |vl| vl.demand);
        let tree = shortest_paths(self.graph, anchor, |l| self.weight(&self.residual, l, demand));
        let servers = self
            .graph
            .servers()
            .filter(|n| !exceeds(compute, self.residual.compute(self.graph, n.id)))
            .map(|n| n.id);
        for cand in rank_candidates(self.graph, &tree, servers) {
            if let Some((residual, routes, delay)) = self.try_candidate(vf, compute, anchor_vl, &cand) {
                self.residual = residual;
                self.embedding.place(vf, cand.node);
                for (vl, path) in routes {
                    self.embedding.set_route(vl, path);
                }
                self.delay = delay;
                return Ok(());
            }
        }
        Err(DlmdError::NoFeasiblePlacement(vf))
    }

    fn try_candidate(
        &self,
        vf: VfId,
        compute: f64,
        anchor_vl: Option<&VlSpec>,
        cand: &TauCandidate,
    ) -> Option<(Residual, Vec<(VlId, Vec<NodeId>)>, f64)> {
        let g = self.graph;
        let mut residual = self.residual.clone();
        let mut delay = self.delay + self.processing(vf, cand.node)?;
        residual.reserve_compute(g, cand.node, compute);
        let mut routes = Vec::new();
        if let Some(vl) = anchor_vl {
            let path = normalise(cand.path.clone());
            reserve(&mut residual, g, &path, vl.demand);
            delay += path_latency(g, &path);
            routes.push((vl.id(), path));
        }
        // remaining VLs between this VF and already placed ones
        for vl in &self.service.vls {
            if anchor_vl.is_some_and(|a| a.id() == vl.id()) {
                continue;
            }
            let (a, b) = match (vl.from == vf, vl.to == vf) {
                (false, true) => match self.embedding.placement(vl.from) {
                    Some(a) => (a, cand.node),
                    None => continue,
                },
                (true, false) => match self.embedding.placement(vl.to) {
                    Some(b) => (cand.node, b),
                    None => continue,
                },
                _ => continue,
            };
            let tree = shortest_paths(g, a, |l| self.weight(&residual, l, vl.demand));
            let path = normalise(tree.path(g, b)?);
            reserve(&mut residual, g, &path, vl.demand);
            delay += path_latency(g, &path);
            routes.push((vl.id(), path));
        }
        (!exceeds(delay, self.service.deadline)).then_some((residual, routes, delay))
    }

    fn hosts(&self, vl: &VlSpec) -> Option<(NodeId, NodeId)> {
        Some((self.embedding.placement(vl.from)?, self.embedding.placement(vl.to)?))
    }

    fn route(&self, a: NodeId, b: NodeId, demand: f64) -> Option<Vec<NodeId>> {
        let tree = shortest_paths(self.graph, a, |l| self.weight(&self.residual, l, demand));
        tree.path(self.graph, b).map(normalise)
    }

    fn commit_route(&mut self, vl: &VlSpec, path: Vec<NodeId>) {
        reserve(&mut self.residual, self.graph, &path, vl.demand);
        self.delay += path_latency(self.graph, &path);
        self.embedding.set_route(vl.id(), path);
    }

    /// Processing delay of `vf` on `host`, `None` when its queue would be unstable.
    fn processing(&self, vf: VfId, host: NodeId) -> Option<f64> {
        let spec = self.service.vf(vf)?;
        let rate = spec.compute * self.graph.node(host)?.processing_rate();
        self.service
            .incoming(vf)
            .try_fold(0.0, |acc, vl| Some(acc + mg1ps_delay(rate, vl.demand)?))
    }

    fn weight(&self, residual: &Residual, l: &Link, demand: f64) -> Option<f64> {
        if l.wireless() && l.key() != LinkKey::new(self.robot, self.poa) {
            return None;
        }
        if exceeds(demand, residual.capacity(self.graph, l.key())) {
            return None;
        }
        let lambda = if l.wireless() {
            link_capacity(self.graph, l, self.radio, self.opts.capacity_mode)
        } else {
            l.bandwidth
        };
        Some(self.opts.alpha / lambda + l.latency())
    }
}

// a path that never leaves its start node is stored as an empty route
fn normalise(path: Vec<NodeId>) -> Vec<NodeId> {
    if path.len() < 2 {
        Vec::new()
    } else {
        path
    }
}

fn reserve(residual: &mut Residual, graph: &HardwareGraph, path: &[NodeId], demand: f64) {
    for w in path.windows(2) {
        residual.reserve_link(graph, LinkKey::new(w[0], w[1]), demand);
    }
}
