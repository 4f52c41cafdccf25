//! Reconstructed comparison placers.
//!
//! * latency-agnostic: attaches to the strongest signal, puts every VF on the
//!   cheapest server that has room and routes by inverse bandwidth only. It
//!   never looks at the deadline.
//! * radio-agnostic: the greedy placer with wireless links rated at their raw
//!   bandwidth, so poor SNR goes unnoticed. Its output is not verified.

use thiserror::Error;

use crate::dlmd::{place_service_with, place_services, CapacityMode, DlmdError, DlmdOptions};
use crate::feasibility::exceeds;
use crate::model::{Embedding, HardwareGraph, LinkKey, NodeId, RadioState, ServiceId, ServiceSpec, VfId};
use crate::routing::{shortest_paths, Residual};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("no server has room for {0}")]
    NoFeasibleCapacity(VfId),
    #[error("robot {0} has no PoA")]
    NoPoa(NodeId),
    #[error("service {0} has no VF pinned to a robot")]
    NoRobot(ServiceId),
}

pub fn latency_agnostic_solve(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    robot: NodeId,
    radio: &RadioState,
) -> Result<Embedding, BaselineError> {
    let mut residual = Residual::new(graph, radio, CapacityMode::Effective);
    latency_agnostic_into(graph, service, robot, radio, &mut residual, None)
}

/// Latency-agnostic placement of several services on shared capacity.
pub fn latency_agnostic_solve_all(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    radio: &RadioState,
) -> Result<Embedding, BaselineError> {
    let mut residual = Residual::new(graph, radio, CapacityMode::Effective);
    let mut out = Embedding::new();
    for s in services {
        let robot = s.robot(graph).ok_or(BaselineError::NoRobot(s.id))?;
        let fixed = out.attachment_of(robot);
        out.merge(latency_agnostic_into(graph, s, robot, radio, &mut residual, fixed)?);
    }
    Ok(out)
}

/// PoA with the strongest received signal, ties by id.
pub fn strongest_poa(graph: &HardwareGraph, robot: NodeId, radio: &RadioState) -> Option<NodeId> {
    graph
        .poas_of(robot)
        .into_iter()
        .rev()
        .max_by(|&a, &b| radio.sigma(robot, a).total_cmp(&radio.sigma(robot, b)))
}

fn latency_agnostic_into(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    robot: NodeId,
    radio: &RadioState,
    residual: &mut Residual,
    fixed_poa: Option<NodeId>,
) -> Result<Embedding, BaselineError> {
    let poa = fixed_poa
        .or_else(|| strongest_poa(graph, robot, radio))
        .ok_or(BaselineError::NoPoa(robot))?;
    let attached = LinkKey::new(robot, poa);
    let mut e = Embedding::new();
    e.attach(robot, poa);
    let mut servers: Vec<(f64, NodeId)> = graph.servers().map(|n| (n.cost(), n.id)).collect();
    servers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut res = residual.clone();
    let route = |res: &Residual, a: NodeId, b: NodeId, demand: f64| -> Option<Vec<NodeId>> {
        if a == b {
            return Some(Vec::new());
        }
        let tree = shortest_paths(graph, a, |l| {
            if l.wireless() && l.key() != attached {
                return None;
            }
            (!exceeds(demand, res.capacity(graph, l.key()))).then(|| 1.0 / l.bandwidth)
        });
        tree.path(graph, b)
    };
    let reserve = |res: &mut Residual, path: &[NodeId], demand: f64| {
        for w in path.windows(2) {
            res.reserve_link(graph, LinkKey::new(w[0], w[1]), demand);
        }
    };

    for vf in &service.vfs {
        if let Some(pin) = vf.pin {
            res.reserve_compute(graph, pin, vf.compute);
            e.place(vf.id, pin);
            continue;
        }
        // cheapest server with room that the VF's incoming traffic can reach
        let mut chosen = None;
        for &(_, n) in &servers {
            if exceeds(vf.compute, res.compute(graph, n)) {
                continue;
            }
            let mut trial = res.clone();
            let mut routes = Vec::new();
            let mut ok = true;
            for vl in service.incoming(vf.id) {
                let Some(src) = e.placement(vl.from) else { continue };
                match route(&trial, src, n, vl.demand) {
                    Some(p) => {
                        reserve(&mut trial, &p, vl.demand);
                        routes.push((vl.id(), p));
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                trial.reserve_compute(graph, n, vf.compute);
                chosen = Some((n, trial, routes));
                break;
            }
        }
        let (n, trial, routes) = chosen.ok_or(BaselineError::NoFeasibleCapacity(vf.id))?;
        res = trial;
        e.place(vf.id, n);
        for (vl, p) in routes {
            e.set_route(vl, p);
        }
    }
    // VLs not yet routed: pinned-to-pinned or pointing upstream
    for vl in &service.vls {
        if e.route(vl.id()).is_some() {
            continue;
        }
        let (a, b) = (e.placement(vl.from).unwrap(), e.placement(vl.to).unwrap());
        let p = route(&res, a, b, vl.demand).ok_or(BaselineError::NoFeasibleCapacity(vl.to))?;
        reserve(&mut res, &p, vl.demand);
        e.set_route(vl.id(), p);
    }
    *residual = res;
    Ok(e)
}

fn radio_agnostic_options() -> DlmdOptions {
    DlmdOptions {
        capacity_mode: CapacityMode::Raw,
        verify: false,
        ..DlmdOptions::default()
    }
}

pub fn radio_agnostic_solve(
    graph: &HardwareGraph,
    service: &ServiceSpec,
    robot: NodeId,
    radio: &RadioState,
) -> Result<Embedding, DlmdError> {
    place_service_with(graph, service, robot, radio, &radio_agnostic_options())
}

pub fn radio_agnostic_solve_all(
    graph: &HardwareGraph,
    services: &[ServiceSpec],
    radio: &RadioState,
    alpha: f64,
) -> Result<Embedding, DlmdError> {
    let opts = DlmdOptions {
        alpha,
        ..radio_agnostic_options()
    };
    place_services(graph, services, radio, &opts)
}
