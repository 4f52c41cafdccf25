use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{LinkKey, NodeId, VfId, VlId};

/// A full embedding decision: where each VF runs, the node path each VL
/// follows, and the PoA each robot is attached to.
///
/// Routes are explicit node paths; a VL whose endpoints share a node has an
/// empty route.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "EmbeddingRepr", into = "EmbeddingRepr")]
pub struct Embedding {
    pub placements: BTreeMap<VfId, NodeId>,
    pub routes: BTreeMap<VlId, Vec<NodeId>>,
    pub attachment: BTreeMap<NodeId, NodeId>,
}

impl Embedding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn place(&mut self, vf: VfId, node: NodeId) {
        self.placements.insert(vf, node);
    }

    pub fn set_route(&mut self, vl: VlId, path: Vec<NodeId>) {
        self.routes.insert(vl, path);
    }

    pub fn attach(&mut self, robot: NodeId, poa: NodeId) {
        self.attachment.insert(robot, poa);
    }

    pub fn placement(&self, vf: VfId) -> Option<NodeId> {
        self.placements.get(&vf).copied()
    }

    pub fn route(&self, vl: VlId) -> Option<&[NodeId]> {
        self.routes.get(&vl).map(Vec::as_slice)
    }

    pub fn attachment_of(&self, robot: NodeId) -> Option<NodeId> {
        self.attachment.get(&robot).copied()
    }

    /// VFs hosted at `node`.
    pub fn hosted_vfs(&self, node: NodeId) -> BTreeSet<VfId> {
        self.placements
            .iter()
            .filter(|(_, &n)| n == node)
            .map(|(&v, _)| v)
            .collect()
    }

    /// VLs whose route traverses `link`, in either direction.
    pub fn hosted_vls(&self, link: LinkKey) -> BTreeSet<VlId> {
        self.routes
            .iter()
            .filter(|(_, path)| route_hops(path).any(|hop| hop == link))
            .map(|(&vl, _)| vl)
            .collect()
    }

    /// Merge another embedding into this one; entries of `other` win.
    pub fn merge(&mut self, other: Embedding) {
        self.placements.extend(other.placements);
        self.routes.extend(other.routes);
        self.attachment.extend(other.attachment);
    }
}

/// Consecutive node pairs of a route as unordered link keys.
pub(crate) fn route_hops(path: &[NodeId]) -> impl Iterator<Item = LinkKey> + '_ {
    path.windows(2).map(|w| LinkKey::new(w[0], w[1]))
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRepr {
    placements: Vec<PlacementRepr>,
    routes: Vec<RouteRepr>,
    attachment: Vec<AttachmentRepr>,
}

#[derive(Serialize, Deserialize)]
struct PlacementRepr {
    vf: VfId,
    node: NodeId,
}

#[derive(Serialize, Deserialize)]
struct RouteRepr {
    from: VfId,
    to: VfId,
    path: Vec<NodeId>,
}

#[derive(Serialize, Deserialize)]
struct AttachmentRepr {
    robot: NodeId,
    poa: NodeId,
}

impl From<EmbeddingRepr> for Embedding {
    fn from(r: EmbeddingRepr) -> Self {
        Embedding {
            placements: r.placements.into_iter().map(|p| (p.vf, p.node)).collect(),
            routes: r
                .routes
                .into_iter()
                .map(|r| (VlId::new(r.from, r.to), r.path))
                .collect(),
            attachment: r.attachment.into_iter().map(|a| (a.robot, a.poa)).collect(),
        }
    }
}

impl From<Embedding> for EmbeddingRepr {
    fn from(e: Embedding) -> Self {
        EmbeddingRepr {
            placements: e
                .placements
                .into_iter()
                .map(|(vf, node)| PlacementRepr { vf, node })
                .collect(),
            routes: e
                .routes
                .into_iter()
                .map(|(vl, path)| RouteRepr { from: vl.from, to: vl.to, path })
                .collect(),
            attachment: e
                .attachment
                .into_iter()
                .map(|(robot, poa)| AttachmentRepr { robot, poa })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_hosts_nothing() {
        let e = Embedding::new();
        assert!(e.hosted_vfs(NodeId(0)).is_empty());
        assert!(e.hosted_vls(LinkKey::new(NodeId(0), NodeId(1))).is_empty());
    }

    #[test]
    fn hosted_vfs_on_shared_node() {
        let mut e = Embedding::new();
        e.place(VfId(1), NodeId(5));
        e.place(VfId(3), NodeId(5));
        e.place(VfId(4), NodeId(6));
        assert_eq!(e.hosted_vfs(NodeId(5)), BTreeSet::from([VfId(1), VfId(3)]));
        assert_eq!(e.hosted_vfs(NodeId(6)), BTreeSet::from([VfId(4)]));
    }

    #[test]
    fn hosted_vls_either_direction() {
        let mut e = Embedding::new();
        let a = VlId::new(VfId(0), VfId(1));
        let b = VlId::new(VfId(2), VfId(3));
        e.set_route(a, vec![NodeId(0), NodeId(1), NodeId(2)]);
        e.set_route(b, vec![NodeId(3), NodeId(2), NodeId(1)]);
        assert_eq!(e.hosted_vls(LinkKey::new(NodeId(2), NodeId(1))), BTreeSet::from([a, b]));
        assert_eq!(e.hosted_vls(LinkKey::new(NodeId(0), NodeId(1))), BTreeSet::from([a]));
        assert!(e.hosted_vls(LinkKey::new(NodeId(0), NodeId(3))).is_empty());
    }

    #[test]
    fn serde_uses_lists() {
        let mut e = Embedding::new();
        e.place(VfId(1), NodeId(2));
        e.set_route(VlId::new(VfId(0), VfId(1)), vec![NodeId(0), NodeId(1), NodeId(2)]);
        e.attach(NodeId(0), NodeId(1));
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["placements"][0]["node"], 2);
        assert_eq!(json["attachment"][0]["poa"], 1);
        let back: Embedding = serde_json::from_value(json).unwrap();
        assert_eq!(back, e);
    }
}
