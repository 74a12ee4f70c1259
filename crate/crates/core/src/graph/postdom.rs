use super::cfg::{Cfg, CfgNode};
use std::collections::{BTreeMap, BTreeSet};

/// Postdominator sets and the immediate-postdominator tree of an augmented CFG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostDominators {
    sets: BTreeMap<CfgNode, BTreeSet<CfgNode>>,
    ipdom: BTreeMap<CfgNode, CfgNode>,
}

impl PostDominators {
    /// Immediate postdominator; `None` only for `Exit`.
    pub fn ipdom(&self, n: CfgNode) -> Option<CfgNode> {
        self.ipdom.get(&n).copied()
    }

    pub fn tree(&self) -> &BTreeMap<CfgNode, CfgNode> {
        &self.ipdom
    }

    /// Reflexive postdominance: does `a` lie on every path from `b` to `Exit`?
    pub fn postdominates(&self, a: CfgNode, b: CfgNode) -> bool {
        self.sets.get(&b).is_some_and(|s| s.contains(&a))
    }

    pub fn set(&self, n: CfgNode) -> &BTreeSet<CfgNode> {
        &self.sets[&n]
    }
}

/// Iterative dataflow on the reverse CFG: `pdom(n) = {n} ∪ ⋂ pdom(s)` over successors.
pub fn postdominators(g: &Cfg) -> PostDominators {
    let all: BTreeSet<CfgNode> = g.nodes().iter().copied().collect();
    let mut sets: BTreeMap<CfgNode, BTreeSet<CfgNode>> = g
        .nodes()
        .iter()
        .map(|&n| (n, if n == CfgNode::Exit { BTreeSet::from([n]) } else { all.clone() }))
        .collect();

    // reverse node order visits statements bottom-up, which converges quickly for
    // mostly-forward code
    let order: Vec<CfgNode> = g.nodes().iter().rev().copied().filter(|&n| n != CfgNode::Exit).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &n in &order {
            let mut succs = g.succs(n).iter();
            let mut next = match succs.next() {
                Some(s) => sets[s].clone(),
                None => all.clone(),
            };
            for s in succs {
                next.retain(|x| sets[s].contains(x));
            }
            next.insert(n);
            if next != sets[&n] {
                sets.insert(n, next);
                changed = true;
            }
        }
    }

    // The strict postdominators of a node form a chain; the immediate one is the
    // element whose own set is exactly one smaller.
    let mut ipdom = BTreeMap::new();
    for (&n, set) in &sets {
        if n == CfgNode::Exit {
            continue;
        }
        let target = set.len() - 1;
        let p = set
            .iter()
            .copied()
            .find(|&p| p != n && sets[&p].len() == target)
            .expect("augmented CFG: every node is postdominated by Exit");
        ipdom.insert(n, p);
    }
    PostDominators { sets, ipdom }
}

/// `(controller, dependent)` pairs: `b` depends on `a` iff `a` has a successor `s` with
/// `b` postdominating `s` but not strictly postdominating `a`.
pub fn control_deps(g: &Cfg, pdom: &PostDominators) -> BTreeSet<(CfgNode, CfgNode)> {
    let mut deps = BTreeSet::new();
    for (a, s) in g.edges() {
        let stop = pdom.ipdom(a);
        let mut runner = Some(s);
        while let Some(r) = runner {
            if Some(r) == stop || r == CfgNode::Exit {
                break;
            }
            deps.insert((a, r));
            runner = pdom.ipdom(r);
        }
    }
    deps
}
