//! Reaching definitions and def-use edges.

use super::cfg::{Cfg, CfgNode};
use crate::ir::{MethodDecl, Var};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// A definition at statement `def` of `var` reaching a use of `var` at statement `use_`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataDep {
    pub def: usize,
    pub use_: usize,
    pub var: Var,
}

/// Definitions reaching the entry of each CFG node, as `(defining stmt, var)` pairs.
pub fn reaching_definitions(g: &Cfg, m: &MethodDecl) -> BTreeMap<CfgNode, BTreeSet<(usize, Var)>> {
    let defs_of: BTreeMap<Var, BTreeSet<usize>> = g.stmt_nodes().fold(BTreeMap::new(), |mut acc, i| {
        if let Some(v) = m.body[i].def() {
            acc.entry(v).or_insert_with(BTreeSet::new).insert(i);
        }
        acc
    });

    let mut inn: BTreeMap<CfgNode, BTreeSet<(usize, Var)>> =
        g.nodes().iter().map(|&n| (n, BTreeSet::new())).collect();
    let mut out = inn.clone();
    let mut work: VecDeque<CfgNode> = g.nodes().iter().copied().collect();
    let mut queued: BTreeSet<CfgNode> = work.iter().copied().collect();

    while let Some(n) = work.pop_front() {
        queued.remove(&n);
        let mut in_n = BTreeSet::new();
        for p in g.preds(n) {
            in_n.extend(out[p].iter().copied());
        }
        let mut out_n = in_n.clone();
        if let CfgNode::Stmt(i) = n {
            if let Some(v) = m.body[i].def() {
                for &d in &defs_of[&v] {
                    out_n.remove(&(d, v));
                }
                out_n.insert((i, v));
            }
        }
        inn.insert(n, in_n);
        if out_n != out[&n] {
            out.insert(n, out_n);
            for &s in g.succs(n) {
                if queued.insert(s) {
                    work.push_back(s);
                }
            }
        }
    }
    inn
}

/// One edge per definition that reaches a use of the same variable.
pub fn data_deps(g: &Cfg, m: &MethodDecl) -> BTreeSet<DataDep> {
    let reaching = reaching_definitions(g, m);
    let mut deps = BTreeSet::new();
    for i in g.stmt_nodes() {
        let uses: BTreeSet<Var> = m.body[i].uses().into_iter().collect();
        for &(def, var) in &reaching[&CfgNode::Stmt(i)] {
            if uses.contains(&var) {
                deps.insert(DataDep { def, use_: i, var });
            }
        }
    }
    deps
}
