use crate::ir::{MethodDecl, Stmt};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

/// A CFG node. Statement nodes use the method-local statement index; labels never
/// become nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CfgNode {
    Entry,
    Stmt(usize),
    Exit,
}

impl fmt::Display for CfgNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CfgNode::Entry => f.write_str("ENTRY"),
            CfgNode::Stmt(i) => write!(f, "{i}"),
            CfgNode::Exit => f.write_str("EXIT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    nodes: Vec<CfgNode>,
    succs: BTreeMap<CfgNode, Vec<CfgNode>>,
    preds: BTreeMap<CfgNode, Vec<CfgNode>>,
    /// Edges added so every node reaches `Exit`; included in `succs`.
    augmented: BTreeSet<(CfgNode, CfgNode)>,
}

impl Cfg {
    /// Builds a CFG from explicit successor lists, then augments it.
    /// `Entry` and `Exit` are always present.
    pub fn from_edges(stmts: impl IntoIterator<Item = usize>, edges: &[(CfgNode, CfgNode)]) -> Cfg {
        let mut nodes: BTreeSet<CfgNode> = stmts.into_iter().map(CfgNode::Stmt).collect();
        nodes.insert(CfgNode::Entry);
        nodes.insert(CfgNode::Exit);
        let mut succs: BTreeMap<CfgNode, Vec<CfgNode>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
        for &(a, b) in edges {
            let list = succs.get_mut(&a).expect("edge source is a node");
            assert!(nodes.contains(&b), "edge target {b} is not a node");
            if !list.contains(&b) {
                list.push(b);
            }
        }
        for list in succs.values_mut() {
            list.sort();
        }
        let mut cfg = Cfg {
            nodes: nodes.into_iter().collect(),
            succs,
            preds: BTreeMap::new(),
            augmented: BTreeSet::new(),
        };
        cfg.augment();
        cfg.rebuild_preds();
        cfg
    }

    pub fn nodes(&self) -> &[CfgNode] {
        &self.nodes
    }

    pub fn succs(&self, n: CfgNode) -> &[CfgNode] {
        self.succs.get(&n).map_or(&[], Vec::as_slice)
    }

    /// Successors along real control flow, without augmentation edges.
    pub fn flow_succs(&self, n: CfgNode) -> impl Iterator<Item = CfgNode> + '_ {
        self.succs(n).iter().copied().filter(move |&s| !self.augmented.contains(&(n, s)))
    }

    pub fn preds(&self, n: CfgNode) -> &[CfgNode] {
        self.preds.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn edges(&self) -> impl Iterator<Item = (CfgNode, CfgNode)> + '_ {
        self.succs.iter().flat_map(|(&a, bs)| bs.iter().map(move |&b| (a, b)))
    }

    pub fn augmented_edges(&self) -> &BTreeSet<(CfgNode, CfgNode)> {
        &self.augmented
    }

    pub fn stmt_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            CfgNode::Stmt(i) => Some(*i),
            _ => None,
        })
    }

    /// Adds an edge to `Exit` from the lowest-numbered node of every region that cannot
    /// reach it, until all nodes do.
    fn augment(&mut self) {
        loop {
            let reach = self.reaching_exit();
            let stuck = self.nodes.iter().copied().find(|n| *n != CfgNode::Entry && !reach.contains(n));
            let stuck = stuck.or_else(|| (!reach.contains(&CfgNode::Entry)).then_some(CfgNode::Entry));
            match stuck {
                Some(n) => {
                    let list = self.succs.get_mut(&n).expect("node");
                    list.push(CfgNode::Exit);
                    list.sort();
                    self.augmented.insert((n, CfgNode::Exit));
                }
                None => break,
            }
        }
    }

    fn reaching_exit(&self) -> BTreeSet<CfgNode> {
        let mut rev: BTreeMap<CfgNode, Vec<CfgNode>> = BTreeMap::new();
        for (a, b) in self.edges() {
            rev.entry(b).or_default().push(a);
        }
        let mut seen = BTreeSet::from([CfgNode::Exit]);
        let mut queue = VecDeque::from([CfgNode::Exit]);
        while let Some(n) = queue.pop_front() {
            for &p in rev.get(&n).map_or(&[][..], Vec::as_slice) {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    fn rebuild_preds(&mut self) {
        let mut preds: BTreeMap<CfgNode, Vec<CfgNode>> = self.nodes.iter().map(|&n| (n, Vec::new())).collect();
        for (a, b) in self.edges().collect::<Vec<_>>() {
            preds.get_mut(&b).expect("node").push(a);
        }
        for list in preds.values_mut() {
            list.sort();
        }
        self.preds = preds;
    }
}

/// Control-flow graph of one method: fallthrough, `goto` and `if` edges, with `return`
/// and the end of the body flowing to `Exit`. Labels are transparent.
pub fn build_cfg(m: &MethodDecl) -> Cfg {
    let body = &m.body;
    // first non-label statement at or after `i`
    let settle = |i: usize| -> CfgNode {
        (i..body.len()).find(|&j| !body[j].is_label()).map_or(CfgNode::Exit, CfgNode::Stmt)
    };
    let label_pos = |name: &str| -> CfgNode {
        let at = body
            .iter()
            .position(|s| matches!(s, Stmt::Label(l) if l == name))
            .expect("labels are validated before CFG construction");
        settle(at)
    };

    let mut edges = vec![(CfgNode::Entry, settle(0))];
    let stmts: Vec<usize> = (0..body.len()).filter(|&i| !body[i].is_label()).collect();
    for &i in &stmts {
        let here = CfgNode::Stmt(i);
        match &body[i] {
            Stmt::Goto(l) => edges.push((here, label_pos(l))),
            Stmt::If { target, .. } => {
                edges.push((here, settle(i + 1)));
                edges.push((here, label_pos(target)));
            }
            Stmt::Return(_) => edges.push((here, CfgNode::Exit)),
            _ => edges.push((here, settle(i + 1))),
        }
    }
    Cfg::from_edges(stmts, &edges)
}
