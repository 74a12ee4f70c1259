//! Reachability by transitive closure over an adjacency matrix.

use privslice::graph::{Adg, AdgNode, EdgeKind};
use std::collections::BTreeSet;

pub fn closure_from(adg: &Adg, seeds: &[AdgNode], include_ctrl: bool) -> BTreeSet<AdgNode> {
    let nodes: Vec<AdgNode> = adg.nodes().iter().copied().collect();
    let n = nodes.len();
    let idx = |x: &AdgNode| nodes.iter().position(|y| y == x);
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in adg.edges() {
        if e.kind == EdgeKind::Ctrl && !include_ctrl {
            continue;
        }
        if let (Some(a), Some(b)) = (idx(&e.from), idx(&e.to)) {
            m[a][b] = true;
        }
    }
    for k in 0..n {
        let via = m[k].clone();
        for row in m.iter_mut() {
            if row[k] {
                for (cell, &reach) in row.iter_mut().zip(&via) {
                    *cell |= reach;
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for s in seeds {
        if let Some(i) = idx(s) {
            out.extend((0..n).filter(|&j| m[i][j]).map(|j| nodes[j]));
        }
    }
    out
}

/// `Ok` when `reachable` agrees with the closure for both edge policies.
pub fn check_adg(adg: &Adg, seeds: &[AdgNode]) -> Result<(), String> {
    for ctrl in [false, true] {
        let (got, edges) = privslice::taint::reachable(adg, seeds.iter().copied(), ctrl);
        let want = closure_from(adg, seeds, ctrl);
        if got != want {
            return Err(format!("ctrl={ctrl}: got {} nodes, closure has {}", got.len(), want.len()));
        }
        if !seeds.iter().all(|s| got.contains(s)) {
            return Err("a seed is missing from its slice".into());
        }
        let want_edges = adg
            .edges()
            .iter()
            .filter(|e| (ctrl || e.kind != EdgeKind::Ctrl) && want.contains(&e.from))
            .count();
        if edges.len() != want_edges || edges.iter().any(|e| !got.contains(&e.to)) {
            return Err(format!("ctrl={ctrl}: slice edges disagree"));
        }
    }
    Ok(())
}
