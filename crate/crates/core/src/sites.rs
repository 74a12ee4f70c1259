//! Resolution of call sites against the dataset.
//!
//! Static calls carry their signature. For a virtual call with no declared target the
//! receiver's class is taken from the owner of the static call that defined it,
//! following DATA edges through copies; `r1 = call java.security.MessageDigest.getInstance(r0)`
//! makes `vcall r1.digest(r2)` a call to `java.security.MessageDigest.digest`.

use crate::dataset::{ApiClassification, Dataset};
use crate::graph::{stmt_at, Adg, AdgNode, Callee};
use crate::ir::{CallRef, MethodId, Program, Rhs, Sig, Stmt, Var};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub enum SiteTarget<'d> {
    Internal(Vec<MethodId>),
    External { sig: Option<Sig>, class: ApiClassification<'d> },
}

impl<'d> SiteTarget<'d> {
    pub fn classification(&self) -> ApiClassification<'d> {
        match self {
            SiteTarget::Internal(_) => ApiClassification::Unknown,
            SiteTarget::External { class, .. } => *class,
        }
    }
}

/// Candidate external signatures of the call at `node`, sorted; empty for internal calls.
pub fn external_signatures(p: &Program, adg: &Adg, node: AdgNode) -> Vec<Sig> {
    let Some(i) = node.stmt_index() else { return Vec::new() };
    let Some(stmt) = stmt_at(p, node) else { return Vec::new() };
    let Some(callees) = adg.call_graph().callees(node.method, i) else { return Vec::new() };
    let mut out = BTreeSet::new();
    for c in callees {
        match c {
            Callee::Internal(_) => {}
            Callee::External(sig) => {
                out.insert(sig.clone());
            }
            Callee::ExternalVirtual(method) => {
                if let Some(CallRef::Virtual { receiver, .. }) = stmt.call() {
                    for owner in receiver_owners(p, adg, node, receiver) {
                        out.extend(Sig::from_parts(&owner, method));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// What the call at `node` invokes; `None` if the node is not a call.
pub fn resolve_site<'d>(p: &Program, adg: &Adg, d: &'d Dataset, node: AdgNode) -> Option<SiteTarget<'d>> {
    let i = node.stmt_index()?;
    stmt_at(p, node)?.call()?;
    let internal = adg.call_graph().internal_callees(node.method, i);
    if !internal.is_empty() {
        return Some(SiteTarget::Internal(internal));
    }
    let sigs = external_signatures(p, adg, node);
    let hit = sigs
        .iter()
        .map(|s| (s, d.classify_signature(s)))
        .find(|(_, c)| !c.is_unknown());
    Some(match hit {
        Some((sig, class)) => SiteTarget::External { sig: Some(sig.clone()), class },
        None => SiteTarget::External { sig: sigs.into_iter().next(), class: ApiClassification::Unknown },
    })
}

/// Owner classes of the static calls whose results reach `var` at `node`.
pub fn receiver_owners(p: &Program, adg: &Adg, node: AdgNode, var: Var) -> BTreeSet<String> {
    let mut owners = BTreeSet::new();
    walk_defs(p, adg, node, var, |stmt| {
        if let Stmt::Assign { rhs: Rhs::Call(sig, _), .. } = stmt {
            owners.insert(sig.owner().to_string());
        }
    });
    owners
}

/// Text constants that may flow into `var` at `node`, following copies.
pub fn constant_texts(p: &Program, adg: &Adg, node: AdgNode, var: Var) -> BTreeSet<String> {
    let mut texts = BTreeSet::new();
    walk_defs(p, adg, node, var, |stmt| {
        if let Stmt::Assign { rhs: Rhs::Const(crate::ir::Const::Text(t)), .. } = stmt {
            texts.insert(t.clone());
        }
    });
    texts
}

/// Definitions of `var` reaching `node`, following copies, visiting each non-copy
/// definition once.
pub fn defining_nodes(p: &Program, adg: &Adg, node: AdgNode, var: Var) -> BTreeSet<AdgNode> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![(node, var)];
    while let Some((n, v)) = stack.pop() {
        if !seen.insert((n, v)) {
            continue;
        }
        for &def in adg.reaching_defs(n, v) {
            match stmt_at(p, def) {
                Some(Stmt::Assign { rhs: Rhs::Copy(w), .. }) => stack.push((def, *w)),
                Some(_) => {
                    out.insert(def);
                }
                None => {}
            }
        }
    }
    out
}

fn walk_defs(p: &Program, adg: &Adg, node: AdgNode, var: Var, mut visit: impl FnMut(&Stmt)) {
    for def in defining_nodes(p, adg, node, var) {
        if let Some(s) = stmt_at(p, def) {
            visit(s);
        }
    }
}
