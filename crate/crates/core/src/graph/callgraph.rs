use crate::ir::{resolve_callee, CallRef, MethodId, Program, Resolved, Sig};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Callee {
    Internal(MethodId),
    /// Static call to a method outside the program.
    External(Sig),
    /// Virtual call with no declared method of that name; the receiver class is unknown here.
    ExternalVirtual(String),
}

/// Call-site → callees, keyed by `(caller, statement index)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    edges: BTreeMap<(MethodId, usize), BTreeSet<Callee>>,
}

impl CallGraph {
    pub fn callees(&self, caller: MethodId, stmt: usize) -> Option<&BTreeSet<Callee>> {
        self.edges.get(&(caller, stmt))
    }

    pub fn sites(&self) -> impl Iterator<Item = (&(MethodId, usize), &BTreeSet<Callee>)> {
        self.edges.iter()
    }

    pub fn internal_callees(&self, caller: MethodId, stmt: usize) -> Vec<MethodId> {
        self.callees(caller, stmt)
            .into_iter()
            .flatten()
            .filter_map(|c| match c {
                Callee::Internal(m) => Some(*m),
                _ => None,
            })
            .collect()
    }

    /// Call sites (in any method) that may invoke `callee`.
    pub fn callers_of(&self, callee: MethodId) -> impl Iterator<Item = (MethodId, usize)> + '_ {
        self.edges
            .iter()
            .filter(move |(_, cs)| cs.contains(&Callee::Internal(callee)))
            .map(|(&k, _)| k)
    }
}

/// Static calls resolve directly; virtual calls resolve by class hierarchy analysis to
/// every declared method with the called name.
pub fn build_call_graph(p: &Program) -> CallGraph {
    let mut by_name: BTreeMap<&str, BTreeSet<MethodId>> = BTreeMap::new();
    for (id, _, m) in p.methods() {
        by_name.entry(m.name.as_str()).or_default().insert(id);
    }

    let mut edges = BTreeMap::new();
    for (caller, _, m) in p.methods() {
        for (i, s) in m.body.iter().enumerate() {
            let targets: BTreeSet<Callee> = match s.call() {
                None => continue,
                Some(CallRef::Static { callee, .. }) => match resolve_callee(p, callee) {
                    Resolved::Internal(id) => BTreeSet::from([Callee::Internal(id)]),
                    Resolved::External(sig) => BTreeSet::from([Callee::External(sig)]),
                },
                Some(CallRef::Virtual { method, .. }) => match by_name.get(method) {
                    Some(ids) => ids.iter().map(|&id| Callee::Internal(id)).collect(),
                    None => BTreeSet::from([Callee::ExternalVirtual(method.to_string())]),
                },
            };
            edges.insert((caller, i), targets);
        }
    }
    CallGraph { edges }
}
