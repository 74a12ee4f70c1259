use crate::graph::{Adg, AdgEdge, AdgNode, EdgeKind};
use crate::sources::{SourceId, SourceInventory};
use std::collections::BTreeSet;

/// Nodes and edges reachable from a set of seeds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Slice {
    pub seeds: Vec<SourceId>,
    pub nodes: BTreeSet<AdgNode>,
    pub edges: Vec<AdgEdge>,
}

impl Slice {
    pub fn contains(&self, n: AdgNode) -> bool {
        self.nodes.contains(&n)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn follows(kind: EdgeKind, include_ctrl: bool) -> bool {
    kind != EdgeKind::Ctrl || include_ctrl
}

/// Forward reachability from `start` over DATA, CALL and PARAM edges, and CTRL edges
/// when `include_ctrl` is set. Seeds not in the graph are ignored.
pub fn reachable(adg: &Adg, start: impl IntoIterator<Item = AdgNode>, include_ctrl: bool) -> (BTreeSet<AdgNode>, Vec<AdgEdge>) {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<AdgNode> = start.into_iter().filter(|n| adg.nodes().contains(n)).collect();
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for e in adg.out_edges(n) {
            if follows(e.kind, include_ctrl) && !seen.contains(&e.to) {
                stack.push(e.to);
            }
        }
    }
    let edges = adg
        .edges()
        .iter()
        .filter(|e| follows(e.kind, include_ctrl) && seen.contains(&e.from))
        .copied()
        .collect();
    (seen, edges)
}

/// The slice seeded by every source in the inventory.
pub fn forward_slice(adg: &Adg, inventory: &SourceInventory, include_ctrl: bool) -> Slice {
    let (nodes, edges) = reachable(adg, inventory.iter().map(|l| l.site), include_ctrl);
    Slice { seeds: inventory.iter().map(|l| l.id).collect(), nodes, edges }
}

/// One slice per source, in inventory order.
pub fn per_source_slices(adg: &Adg, inventory: &SourceInventory, include_ctrl: bool) -> Vec<Slice> {
    inventory
        .iter()
        .map(|l| {
            let (nodes, edges) = reachable(adg, [l.site], include_ctrl);
            Slice { seeds: vec![l.id], nodes, edges }
        })
        .collect()
}
