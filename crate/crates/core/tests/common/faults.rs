//! Single-fault injection into feasible greedy embeddings.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robovf::dlmd::{place_services, DlmdOptions};
use robovf::feasibility::{check_embedding, delay_report, ViolationKind};
use robovf::model::{Embedding, HardwareGraph, LinkKey, NodeId, RadioState, ServiceSpec};

use super::{random_instance, Instance, ROBOT};

pub struct Case {
    pub graph: HardwareGraph,
    pub services: Vec<ServiceSpec>,
    pub radio: RadioState,
    pub embedding: Embedding,
}

pub fn feasible(seed: u64) -> Option<(Instance, Embedding)> {
    let inst = random_instance(seed);
    let e = place_services(&inst.graph, &inst.services, &inst.radio, &DlmdOptions::default()).ok()?;
    Some((inst, e))
}

fn link_loads(inst: &Instance, e: &Embedding) -> Vec<(LinkKey, f64)> {
    let mut out: std::collections::BTreeMap<LinkKey, f64> = Default::default();
    for s in &inst.services {
        for vl in &s.vls {
            let Some(p) = e.route(vl.id()) else { continue };
            let hops: BTreeSet<LinkKey> = p.windows(2).map(|w| LinkKey::new(w[0], w[1])).collect();
            for k in hops {
                *out.entry(k).or_default() += vl.demand;
            }
        }
    }
    out.into_iter().collect()
}

fn slack(inst: &Instance, e: &Embedding, s: usize) -> f64 {
    inst.services[s].deadline - delay_report(&inst.graph, &inst.services[s], e).total_ms
}

/// Apply `kind` to a feasible embedding, or `None` if this instance offers no
/// place for it.
pub fn inject(kind: ViolationKind, inst: Instance, mut e: Embedding, rng: &mut ChaCha8Rng) -> Option<Case> {
    let mut graph = inst.graph.clone();
    let mut services = inst.services.clone();
    let mut radio = inst.radio.clone();
    let pick = |rng: &mut ChaCha8Rng, n: usize| rng.random_range(0..n);
    match kind {
        ViolationKind::Compute => {
            let hosts: Vec<NodeId> = e.placements.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
            let host = hosts[pick(rng, hosts.len())];
            let used: f64 = services
                .iter()
                .flat_map(|s| &s.vfs)
                .filter(|v| e.placement(v.id) == Some(host))
                .map(|v| v.compute)
                .sum();
            let mut inst = inst;
            inst.nodes.iter_mut().find(|n| n.id == host)?.compute = used * 0.5;
            graph = inst.rebuilt();
        }
        ViolationKind::VfUnplaced => {
            let vfs: Vec<_> = e.placements.keys().copied().collect();
            e.placements.remove(&vfs[pick(rng, vfs.len())]);
        }
        ViolationKind::Bandwidth => {
            let wired: Vec<(LinkKey, f64)> = link_loads(&inst, &e)
                .into_iter()
                .filter(|(k, _)| !graph.link(*k).unwrap().wireless())
                .collect();
            if wired.is_empty() {
                return None;
            }
            let (key, load) = wired[pick(rng, wired.len())];
            let mut inst = inst;
            let l = inst.links.iter_mut().find(|l| l.key() == key)?;
            l.bandwidth = load * 0.5 / (1.0 - l.drop);
            graph = inst.rebuilt();
        }
        ViolationKind::VlUnrouted => {
            let vls: Vec<_> = e.routes.iter().filter(|(_, p)| !p.is_empty()).map(|(v, _)| *v).collect();
            if vls.is_empty() {
                return None;
            }
            e.routes.remove(&vls[pick(rng, vls.len())]);
        }
        ViolationKind::Flow => {
            // cut an interior node out where no link bridges the gap
            let cuts: Vec<_> = e
                .routes
                .iter()
                .flat_map(|(v, p)| {
                    (1..p.len().saturating_sub(1))
                        .filter(|&i| graph.link_between(p[i - 1], p[i + 1]).is_none())
                        .map(move |i| (*v, i))
                })
                .collect();
            if cuts.is_empty() {
                return None;
            }
            let (vl, i) = cuts[pick(rng, cuts.len())];
            e.routes.get_mut(&vl).unwrap().remove(i);
        }
        ViolationKind::SteerToVf => {
            // overshoot the destination by one wired hop with room to spare
            let loads = link_loads(&inst, &e);
            let load_of = |k: LinkKey| loads.iter().find(|(x, _)| *x == k).map_or(0.0, |x| x.1);
            let mut options = Vec::new();
            for (si, s) in services.iter().enumerate() {
                for vl in &s.vls {
                    let Some(p) = e.route(vl.id()).filter(|p| !p.is_empty()) else { continue };
                    let last = *p.last().unwrap();
                    for (x, l) in graph.neighbors(last) {
                        if l.wireless() || p.contains(&x) {
                            continue;
                        }
                        let room = l.usable_bandwidth() - load_of(l.key());
                        if room > vl.demand * 1.01 && l.latency() < slack(&inst, &e, si) * 0.99 {
                            options.push((vl.id(), x));
                        }
                    }
                }
            }
            if options.is_empty() {
                return None;
            }
            let (vl, x) = options[pick(rng, options.len())];
            e.routes.get_mut(&vl).unwrap().push(x);
        }
        ViolationKind::Deadline => {
            let s = pick(rng, services.len());
            let total = delay_report(&graph, &services[s], &e).total_ms;
            if total <= 0.0 {
                return None;
            }
            services[s].deadline = total * 0.9;
        }
        ViolationKind::SteerIfAttached => {
            let current = e.attachment_of(ROBOT)?;
            let uses_radio = e.routes.values().any(|p| p.contains(&ROBOT) && p.len() > 1);
            let others: Vec<NodeId> = inst.poas().into_iter().filter(|&p| p != current).collect();
            if !uses_radio || others.is_empty() {
                return None;
            }
            e.attach(ROBOT, others[pick(rng, others.len())]);
        }
        ViolationKind::Attachment => {
            e.attachment.remove(&ROBOT);
        }
        ViolationKind::WirelessCapacity => {
            let poa = e.attachment_of(ROBOT)?;
            let key = LinkKey::new(ROBOT, poa);
            let load = link_loads(&inst, &e).into_iter().find(|(k, _)| *k == key)?.1;
            let l = graph.link(key).unwrap();
            // T = (1-δ)λ·log2(1+σ) = load / 2
            let target = load * 0.5 / ((1.0 - l.drop) * l.bandwidth);
            radio.set_sigma(ROBOT, poa, target.exp2() - 1.0).unwrap();
        }
        ViolationKind::Stability => {
            let fed: Vec<(usize, usize)> = services
                .iter()
                .enumerate()
                .flat_map(|(si, s)| {
                    s.vfs
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| s.incoming(v.id).next().is_some())
                        .map(move |(vi, _)| (si, vi))
                        .collect::<Vec<_>>()
                })
                .collect();
            if fed.is_empty() {
                return None;
            }
            let (si, vi) = fed[pick(rng, fed.len())];
            services[si].vfs[vi].compute = 0.0;
        }
    }
    Some(Case {
        graph,
        services,
        radio,
        embedding: e,
    })
}

/// Inject `count` faults, cycling through the kinds. Returns how many of
/// each kind were applied, or a description of the first mismatch.
pub fn run_injections(count: usize, seed: u64) -> Result<[usize; 11], String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_kind = [0usize; 11];
    let mut done = 0;
    let mut inst_seed = seed;
    while done < count {
        inst_seed += 1;
        if inst_seed > seed + 100 * count as u64 + 1000 {
            return Err(format!("only {done} applicable instances"));
        }
        let kind = ViolationKind::ALL[done % ViolationKind::ALL.len()];
        let Some((inst, e)) = feasible(inst_seed) else { continue };
        let Some(case) = inject(kind, inst, e, &mut rng) else { continue };
        let kinds: BTreeSet<ViolationKind> = check_embedding(&case.graph, &case.services, &case.embedding, &case.radio)
            .iter()
            .map(|v| v.kind)
            .collect();
        if kinds != BTreeSet::from([kind]) {
            return Err(format!("instance {inst_seed}: injected {kind}, got {kinds:?}"));
        }
        per_kind[done % 11] += 1;
        done += 1;
    }
    Ok(per_kind)
}
