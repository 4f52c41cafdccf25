//! Domain types: the hardware graph, robotic services, radio snapshots and
//! the embeddings that solvers produce.

mod embedding;
mod graph;
mod radio;
mod service;

pub use embedding::Embedding;
pub(crate) use embedding::route_hops;
pub use graph::{build_graph, HardwareGraph, Link, LinkKey, Node, NodeKind, Tier};
pub use radio::{RadioState, SigmaEntry};
pub use service::{validate_services, ServiceSpec, VfSpec, VlSpec};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Identifier of a node of the hardware graph.
    NodeId,
    "n"
);
id_type!(
    /// Identifier of a virtual function, unique across all services of a scenario.
    VfId,
    "v"
);
id_type!(
    /// Identifier of a robotic service.
    ServiceId,
    "s"
);

/// A virtual link, identified by its ordered pair of endpoint VFs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VlId {
    pub from: VfId,
    pub to: VfId,
}

impl VlId {
    pub fn new(from: VfId, to: VfId) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for VlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("duplicate identifier {0}")]
    DuplicateId(String),
    #[error("link {a}-{b} references an unknown node")]
    DanglingEndpoint { a: NodeId, b: NodeId },
    #[error("non-robot nodes do not form a connected graph")]
    DisconnectedCore,
    #[error("robot {0} has no wireless link to a PoA")]
    RobotWithoutPoa(NodeId),
    #[error("invalid node {id}: {reason}")]
    InvalidNode { id: NodeId, reason: String },
    #[error("invalid link {a}-{b}: {reason}")]
    InvalidLink { a: NodeId, b: NodeId, reason: String },
    #[error("server costs are not monotone across tiers (near Edge >= far Edge >= Cloud)")]
    CostNotTierMonotone,
    #[error("invalid service {id}: {reason}")]
    InvalidService { id: ServiceId, reason: String },
    #[error("invalid radio state: {0}")]
    InvalidRadio(String),
}
