use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{HardwareGraph, ModelError, NodeId, NodeKind, ServiceId, VfId, VlId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VfSpec {
    pub id: VfId,
    /// CPU units required.
    pub compute: f64,
    /// Node the VF must run on (e.g. the robot driver).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VlSpec {
    pub from: VfId,
    pub to: VfId,
    #[serde(rename = "demand_mbps")]
    pub demand: f64,
}

impl VlSpec {
    pub fn id(&self) -> VlId {
        VlId::new(self.from, self.to)
    }
}

/// A robotic service: a chain of VFs joined by VLs with an end-to-end deadline.
///
/// The order of `vfs` is the chain order used by the greedy placer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSpec {
    pub id: ServiceId,
    pub vfs: Vec<VfSpec>,
    #[serde(default)]
    pub vls: Vec<VlSpec>,
    /// End-to-end budget in ms; `null` in scenario files means unbounded.
    #[serde(rename = "deadline_ms", with = "deadline")]
    pub deadline: f64,
}

impl ServiceSpec {
    pub fn vf(&self, id: VfId) -> Option<&VfSpec> {
        self.vfs.iter().find(|v| v.id == id)
    }

    pub fn vl(&self, id: VlId) -> Option<&VlSpec> {
        self.vls.iter().find(|l| l.id() == id)
    }

    /// VLs terminating at `vf`.
    pub fn incoming(&self, vf: VfId) -> impl Iterator<Item = &VlSpec> + '_ {
        self.vls.iter().filter(move |l| l.to == vf)
    }

    /// Demand of the first declared VL, or 0 for a service without VLs.
    pub fn first_vl_demand(&self) -> f64 {
        self.vls.first().map_or(0.0, |l| l.demand)
    }

    /// The robot this service belongs to: the first pin that is a robot.
    pub fn robot(&self, graph: &HardwareGraph) -> Option<NodeId> {
        self.vfs
            .iter()
            .filter_map(|v| v.pin)
            .find(|&n| graph.node(n).is_some_and(|n| n.kind == NodeKind::Robot))
    }

    pub fn is_pinned(&self, vf: VfId) -> bool {
        self.vf(vf).is_some_and(|v| v.pin.is_some())
    }
}

/// Check a set of services against the graph they will be embedded in.
pub fn validate_services(graph: &HardwareGraph, services: &[ServiceSpec]) -> Result<(), ModelError> {
    let mut service_ids = BTreeSet::new();
    let mut vf_ids = BTreeSet::new();
    for s in services {
        let invalid = |reason: String| ModelError::InvalidService { id: s.id, reason };
        if !service_ids.insert(s.id) {
            return Err(ModelError::DuplicateId(s.id.to_string()));
        }
        if s.deadline.is_nan() || s.deadline < 0.0 {
            return Err(invalid("deadline must be non-negative".into()));
        }
        if s.vfs.is_empty() {
            return Err(invalid("no VFs".into()));
        }
        for vf in &s.vfs {
            if !vf_ids.insert(vf.id) {
                return Err(ModelError::DuplicateId(vf.id.to_string()));
            }
            if !(vf.compute >= 0.0) || !vf.compute.is_finite() {
                return Err(invalid(format!("{} has invalid compute demand", vf.id)));
            }
            if let Some(pin) = vf.pin {
                match graph.node(pin) {
                    Some(n) if matches!(n.kind, NodeKind::Robot | NodeKind::Server) => {}
                    Some(_) => return Err(invalid(format!("{} pinned to a non-computing node", vf.id))),
                    None => return Err(invalid(format!("{} pinned to unknown node {pin}", vf.id))),
                }
            }
        }
        let mut vls = BTreeSet::new();
        for vl in &s.vls {
            if s.vf(vl.from).is_none() || s.vf(vl.to).is_none() {
                return Err(invalid(format!("VL {} references an undeclared VF", vl.id())));
            }
            if vl.from == vl.to {
                return Err(invalid(format!("VL {} is a self loop", vl.id())));
            }
            if !(vl.demand >= 0.0) || !vl.demand.is_finite() {
                return Err(invalid(format!("VL {} has invalid demand", vl.id())));
            }
            if !vls.insert(vl.id()) {
                return Err(ModelError::DuplicateId(format!("VL {}", vl.id())));
            }
        }
    }
    Ok(())
}

mod deadline {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if value.is_finite() {
            s.serialize_f64(*value)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
