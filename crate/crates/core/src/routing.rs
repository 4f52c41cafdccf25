//! Shortest paths over the hardware graph.
//!
//! Only PoAs and switches relay traffic. A search may start at any node but
//! never expands a robot or server it reaches, so every returned path has
//! endpoints of any kind and forwarding nodes in between.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::feasibility::{robot_poa, shannon_capacity};
use crate::model::{HardwareGraph, Link, LinkKey, NodeId, RadioState};

/// Which capacity a wireless link offers: the SNR-attenuated T or the raw
/// usable bandwidth (1 − δ)·λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapacityMode {
    #[default]
    Effective,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of a single-source search.
#[derive(Debug, Clone)]
pub struct PathTree {
    dist: Vec<f64>,
    prev: Vec<Option<usize>>,
}

impl PathTree {
    pub fn distance(&self, graph: &HardwareGraph, to: NodeId) -> Option<f64> {
        let d = self.dist[graph.idx(to)?];
        d.is_finite().then_some(d)
    }

    pub fn path(&self, graph: &HardwareGraph, to: NodeId) -> Option<Vec<NodeId>> {
        let mut i = graph.idx(to)?;
        if !self.dist[i].is_finite() {
            return None;
        }
        let mut path = vec![to];
        while let Some(p) = self.prev[i] {
            path.push(graph.node_at(p).id);
            i = p;
        }
        path.reverse();
        Some(path)
    }
}

/// Dijkstra from `source`. `weight` returns `None` for links that may not be used.
pub fn shortest_paths<W>(graph: &HardwareGraph, source: NodeId, weight: W) -> PathTree
where
    W: Fn(&Link) -> Option<f64>,
{
    let n = graph.len();
    let Some(s) = graph.idx(source) else {
        return PathTree {
            dist: vec![f64::INFINITY; n],
            prev: vec![None; n],
        };
    };
    search(graph, s, &weight, &vec![false; n], &[])
}

fn search<W>(
    graph: &HardwareGraph,
    s: usize,
    weight: &W,
    banned_node: &[bool],
    banned_link: &[usize],
) -> PathTree
where
    W: Fn(&Link) -> Option<f64>,
{
    let n = graph.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Entry { dist: 0.0, node: s });
    while let Some(Entry { dist: d, node: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u != s && !graph.node_at(u).forwards() {
            continue;
        }
        for &(v, li) in graph.adjacency(u) {
            if done[v] || banned_node[v] || banned_link.contains(&li) {
                continue;
            }
            let Some(w) = weight(graph.link_at(li)) else {
                continue;
            };
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = Some(u);
                heap.push(Entry { dist: nd, node: v });
            }
        }
    }
    PathTree { dist, prev }
}

/// Up to `k` loopless paths from `source` to `target` in ascending weight
/// (Yen's algorithm). Ties break by hop count, then by node sequence.
pub fn k_shortest_paths<W>(
    graph: &HardwareGraph,
    source: NodeId,
    target: NodeId,
    k: usize,
    weight: W,
) -> Vec<(f64, Vec<NodeId>)>
where
    W: Fn(&Link) -> Option<f64>,
{
    let (Some(s), Some(t)) = (graph.idx(source), graph.idx(target)) else {
        return Vec::new();
    };
    if k == 0 {
        return Vec::new();
    }
    let n = graph.len();
    let to_idx = |p: &[NodeId]| -> Vec<usize> { p.iter().map(|&id| graph.idx(id).unwrap()).collect() };
    let cost_of = |p: &[usize]| -> f64 {
        p.windows(2)
            .map(|w| weight(graph.link_at(graph.link_index(graph.node_at(w[0]).id, graph.node_at(w[1]).id).unwrap())).unwrap())
            .sum()
    };

    let first = search(graph, s, &weight, &vec![false; n], &[]);
    let Some(p0) = first.path(graph, target) else {
        return Vec::new();
    };
    let mut found: Vec<(f64, Vec<usize>)> = vec![(first.dist[t], to_idx(&p0))];
    let mut pending: Vec<(f64, Vec<usize>)> = Vec::new();

    while found.len() < k {
        let last = found.last().unwrap().1.clone();
        for j in 0..last.len() - 1 {
            let spur = last[j];
            if j > 0 && !graph.node_at(spur).forwards() {
                continue;
            }
            let root = &last[..=j];
            let mut banned_link = Vec::new();
            for (_, p) in &found {
                if p.len() > j && &p[..=j] == root {
                    let a = graph.node_at(p[j]).id;
                    let b = graph.node_at(p[j + 1]).id;
                    banned_link.push(graph.link_index(a, b).unwrap());
                }
            }
            let mut banned_node = vec![false; n];
            for &r in &root[..j] {
                banned_node[r] = true;
            }
            let tree = search(graph, spur, &weight, &banned_node, &banned_link);
            let Some(spur_path) = tree.path(graph, target) else {
                continue;
            };
            let mut full = root[..j].to_vec();
            full.extend(to_idx(&spur_path));
            if found.iter().chain(&pending).any(|(_, p)| *p == full) {
                continue;
            }
            let c = cost_of(&full);
            pending.push((c, full));
        }
        if pending.is_empty() {
            break;
        }
        let best = (0..pending.len())
            .min_by(|&a, &b| {
                let (ca, pa) = &pending[a];
                let (cb, pb) = &pending[b];
                ca.total_cmp(cb)
                    .then(pa.len().cmp(&pb.len()))
                    .then_with(|| pa.cmp(pb))
            })
            .unwrap();
        found.push(pending.swap_remove(best));
    }
    found
        .into_iter()
        .map(|(c, p)| (c, p.into_iter().map(|i| graph.node_at(i).id).collect()))
        .collect()
}

/// Remaining compute per node and capacity per link, decremented as services
/// are embedded one after another.
#[derive(Debug, Clone)]
pub struct Residual {
    compute: Vec<f64>,
    capacity: Vec<f64>,
}

impl Residual {
    pub fn new(graph: &HardwareGraph, radio: &RadioState, mode: CapacityMode) -> Self {
        let compute = graph.nodes().iter().map(|n| n.compute).collect();
        let capacity = graph
            .links()
            .iter()
            .map(|l| link_capacity(graph, l, radio, mode))
            .collect();
        Self { compute, capacity }
    }

    pub fn compute(&self, graph: &HardwareGraph, node: NodeId) -> f64 {
        graph.idx(node).map_or(0.0, |i| self.compute[i])
    }

    pub fn capacity(&self, graph: &HardwareGraph, key: LinkKey) -> f64 {
        graph.link_index(key.0, key.1).map_or(0.0, |i| self.capacity[i])
    }

    pub fn reserve_compute(&mut self, graph: &HardwareGraph, node: NodeId, amount: f64) {
        if let Some(i) = graph.idx(node) {
            self.compute[i] -= amount;
        }
    }

    pub fn reserve_link(&mut self, graph: &HardwareGraph, key: LinkKey, amount: f64) {
        if let Some(i) = graph.link_index(key.0, key.1) {
            self.capacity[i] -= amount;
        }
    }
}

/// Capacity a link offers under `mode`: wired links give (1 − δ)·λ, wireless
/// links give T or (1 − δ)·λ.
pub fn link_capacity(graph: &HardwareGraph, link: &Link, radio: &RadioState, mode: CapacityMode) -> f64 {
    if link.wireless() && mode == CapacityMode::Effective {
        let (robot, poa) = robot_poa(graph, link);
        shannon_capacity(link.bandwidth, link.drop, radio.sigma(robot, poa), radio.noise())
    } else {
        link.usable_bandwidth()
    }
}
