//! Bounded path-enumeration interpreter used as the taint and findings oracle.
//!
//! Every method is executed as an entry with empty parameters; internal calls are
//! executed with the concrete argument facts of the calling path, forking the caller on
//! each distinct return value. Loops are unrolled: a path may visit a statement at
//! most `loop_bound + 1` times. Conditions are not evaluated, both arms are taken.
//! Values carry the class that produced them and constant text, so virtual receivers
//! and algorithm names are resolved per path rather than through the ADG.

use privslice::dataset::{match_ui_field, ApiClassification, Channel, Dataset, Grade, Identifiability, Origin};
use privslice::findings::FindingKind;
use privslice::graph::AdgNode;
use privslice::ir::{Const, MethodId, Program, Rhs, Sig, Stmt, Var};
use privslice::sources::{SourceId, SourceInventory};
use privslice::taint::{Status, TaintFact, TaintState};
use std::collections::{BTreeMap, BTreeSet};

const WEAK: [&str; 2] = ["MD5", "SHA-1"];
const STEP_LIMIT: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OStatus {
    Raw,
    Pseudo(Grade),
}

/// A fact keyed by source site rather than by source id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct OFact {
    pub site: AdgNode,
    pub status: OStatus,
    pub derived: bool,
}

impl OFact {
    fn derive(self) -> OFact {
        OFact { derived: true, ..self }
    }
}

pub type OFacts = BTreeSet<OFact>;

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Val {
    facts: OFacts,
    owner: Option<String>,
    text: Option<String>,
    weak_ctor: bool,
}

impl Val {
    fn facts(facts: OFacts) -> Val {
        Val { facts, ..Val::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OSource {
    pub origin: Origin,
    pub category: String,
    pub identifiability: Identifiability,
}

#[derive(Debug, Default)]
pub struct Observations {
    /// Facts of each used variable on entry to a statement.
    pub before: BTreeMap<(AdgNode, Var), OFacts>,
    /// Facts of the assigned variable after a statement.
    pub after: BTreeMap<(AdgNode, Var), OFacts>,
    pub sources: BTreeMap<AdgNode, OSource>,
    pub sinks: BTreeMap<AdgNode, (Channel, OFacts)>,
    /// Union of operand facts at binary operations and calls.
    pub combined: BTreeMap<AdgNode, OFacts>,
}

pub struct Oracle<'a> {
    p: &'a Program,
    d: &'a Dataset,
    bound: usize,
    pub obs: Observations,
    memo: BTreeMap<(MethodId, Vec<Val>), BTreeSet<Option<Val>>>,
    stack: Vec<MethodId>,
    steps: usize,
}

type Env = BTreeMap<Var, Val>;

fn next_real(body: &[Stmt], from: usize) -> Option<usize> {
    (from..body.len()).find(|&j| !body[j].is_label())
}

fn label_pos(body: &[Stmt], name: &str) -> usize {
    body.iter().position(|s| matches!(s, Stmt::Label(l) if l == name)).expect("label")
}

/// `None` stands for the method exit.
fn succs(body: &[Stmt], i: usize) -> Vec<Option<usize>> {
    let mut out = match &body[i] {
        Stmt::Goto(l) => vec![next_real(body, label_pos(body, l))],
        Stmt::If { target, .. } => vec![next_real(body, label_pos(body, target)), next_real(body, i + 1)],
        Stmt::Return(_) => vec![None],
        _ => vec![next_real(body, i + 1)],
    };
    out.dedup();
    out
}

fn union<'v>(vals: impl IntoIterator<Item = &'v Val>) -> OFacts {
    vals.into_iter().flat_map(|v| v.facts.iter().copied()).collect()
}

impl<'a> Oracle<'a> {
    /// Runs every method as an entry and collects observations.
    pub fn run(p: &'a Program, d: &'a Dataset, loop_bound: usize) -> Oracle<'a> {
        let mut o = Oracle { p, d, bound: loop_bound, obs: Observations::default(), memo: BTreeMap::new(), stack: Vec::new(), steps: 0 };
        for (id, _, _) in p.methods() {
            o.exec(id, Vec::new());
        }
        o
    }

    fn exec(&mut self, m: MethodId, args: Vec<Val>) -> BTreeSet<Option<Val>> {
        let key = (m, args);
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        if self.stack.contains(&m) {
            return BTreeSet::from([None]);
        }
        self.stack.push(m);
        let (_, decl) = self.p.method(m).unwrap();
        let mut visits = vec![0usize; decl.body.len()];
        let mut outcomes = BTreeSet::new();
        let start = next_real(&decl.body, 0);
        self.walk(m, &key.1, start, Env::new(), None, &mut visits, &mut outcomes);
        self.stack.pop();
        self.memo.insert(key, outcomes.clone());
        outcomes
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &mut self,
        m: MethodId,
        args: &[Val],
        at: Option<usize>,
        env: Env,
        ret: Option<Val>,
        visits: &mut Vec<usize>,
        outcomes: &mut BTreeSet<Option<Val>>,
    ) {
        self.steps += 1;
        assert!(self.steps < STEP_LIMIT, "oracle path explosion");
        let Some(i) = at else {
            outcomes.insert(ret);
            return;
        };
        if visits[i] > self.bound {
            return;
        }
        visits[i] += 1;
        let body = &self.p.method(m).unwrap().1.body;
        let next = succs(body, i);
        for (env2, ret2) in self.step(m, i, args, env, ret) {
            for &s in &next {
                self.walk(m, args, s, env2.clone(), ret2.clone(), visits, outcomes);
            }
        }
        visits[i] -= 1;
    }

    fn step(&mut self, m: MethodId, i: usize, args: &[Val], env: Env, ret: Option<Val>) -> Vec<(Env, Option<Val>)> {
        let p = self.p;
        let stmt = &p.method(m).unwrap().1.body[i];
        let node = AdgNode::stmt(m, i);
        let get = |v: &Var| env.get(v).cloned().unwrap_or_default();
        for v in stmt.uses() {
            self.obs.before.entry((node, v)).or_default().extend(get(&v).facts);
        }
        match stmt {
            Stmt::Assign { dest, rhs } => {
                let vals: Vec<Val> = match rhs {
                    Rhs::Const(Const::Text(t)) => vec![Val { text: Some(t.clone()), ..Val::default() }],
                    Rhs::Const(Const::Int(_)) => vec![Val::default()],
                    Rhs::Copy(w) => vec![get(w)],
                    Rhs::BinOp(_, a, b) => {
                        let u = union([&get(a), &get(b)]);
                        self.obs.combined.entry(node).or_default().extend(u.iter().copied());
                        vec![Val::facts(u.into_iter().map(OFact::derive).collect())]
                    }
                    Rhs::Param(k) => vec![Val::facts(args.get(*k).map(|v| v.facts.clone()).unwrap_or_default())],
                    Rhs::UiRead(id) => match p.ui_field(id).and_then(|f| match_ui_field(self.d, f)) {
                        Some((category, identifiability)) => {
                            self.obs.sources.insert(node, OSource { origin: Origin::User, category, identifiability });
                            vec![Val::facts(BTreeSet::from([OFact { site: node, status: OStatus::Raw, derived: false }]))]
                        }
                        None => vec![Val::default()],
                    },
                    Rhs::Call(..) | Rhs::VCall { .. } => self.call(m, i, &env),
                };
                vals.into_iter()
                    .map(|v| {
                        self.obs.after.entry((node, *dest)).or_default().extend(v.facts.iter().copied());
                        let mut e = env.clone();
                        e.insert(*dest, v);
                        (e, ret.clone())
                    })
                    .collect()
            }
            Stmt::Call { .. } | Stmt::VCall { .. } => {
                self.call(m, i, &env);
                vec![(env, ret)]
            }
            Stmt::Return(v) => {
                let r = v.map(|v| get(&v));
                vec![(env, r)]
            }
            _ => vec![(env, ret)],
        }
    }

    fn internal_targets(&self, stmt: &Stmt) -> Vec<MethodId> {
        match stmt {
            Stmt::Assign { rhs: Rhs::Call(sig, _), .. } | Stmt::Call { callee: sig, .. } => self
                .p
                .methods()
                .filter(|(_, c, md)| c.qname == sig.owner() && md.name == sig.method())
                .map(|(id, _, _)| id)
                .collect(),
            Stmt::Assign { rhs: Rhs::VCall { method, .. }, .. } | Stmt::VCall { method, .. } => {
                self.p.methods().filter(|(_, _, md)| md.name == *method).map(|(id, _, _)| id).collect()
            }
            _ => Vec::new(),
        }
    }

    /// Possible values of the call result on this path.
    fn call(&mut self, m: MethodId, i: usize, env: &Env) -> Vec<Val> {
        let p = self.p;
        let stmt = &p.method(m).unwrap().1.body[i];
        let node = AdgNode::stmt(m, i);
        let call = stmt.call().unwrap();
        let get = |v: &Var| env.get(v).cloned().unwrap_or_default();
        let operands: Vec<Val> = call.operands().iter().map(get).collect();
        let operand_facts = union(&operands);
        self.obs.combined.entry(node).or_default().extend(operand_facts.iter().copied());
        let static_sig: Option<&Sig> = match stmt {
            Stmt::Assign { rhs: Rhs::Call(sig, _), .. } | Stmt::Call { callee: sig, .. } => Some(sig),
            _ => None,
        };

        let targets = self.internal_targets(stmt);
        if !targets.is_empty() {
            let arg_vals: Vec<Val> = call.args().iter().map(|v| Val::facts(get(v).facts)).collect();
            let mut results = BTreeSet::new();
            for t in targets {
                let params = p.method(t).unwrap().1.param_count;
                let passed: Vec<Val> = arg_vals.iter().take(params).cloned().collect();
                for outcome in self.exec(t, passed) {
                    results.insert(Val {
                        facts: outcome.map(|v| v.facts).unwrap_or_default(),
                        owner: static_sig.map(|s| s.owner().to_string()),
                        text: None,
                        weak_ctor: false,
                    });
                }
            }
            if results.is_empty() {
                results.insert(Val::default());
            }
            return results.into_iter().collect();
        }

        let sig = match (static_sig, &stmt.call().unwrap()) {
            (Some(s), _) => Some(s.clone()),
            (None, privslice::ir::CallRef::Virtual { method, .. }) => {
                operands[0].owner.as_deref().and_then(|o| Sig::from_parts(o, method))
            }
            _ => None,
        };
        let class = sig.as_ref().map_or(ApiClassification::Unknown, |s| self.d.classify_signature(s));
        let derived: OFacts = operand_facts.iter().map(|f| f.derive()).collect();
        let facts = match class {
            ApiClassification::Source(rule) => {
                self.obs.sources.insert(
                    node,
                    OSource { origin: Origin::System, category: rule.category.clone(), identifiability: rule.identifiability },
                );
                let mut f = derived;
                f.insert(OFact { site: node, status: OStatus::Raw, derived: false });
                f
            }
            ApiClassification::Pseudonymizer(rule) => {
                let weak = operands
                    .iter()
                    .any(|v| v.weak_ctor || v.text.as_deref().is_some_and(|t| WEAK.contains(&t)));
                let grade = if weak { Grade::Weak } else { rule.grade };
                operand_facts.iter().map(|f| OFact { status: OStatus::Pseudo(grade), ..*f }).collect()
            }
            ApiClassification::Sink(rule) => {
                let e = self.obs.sinks.entry(node).or_insert((rule.channel, OFacts::new()));
                e.1.extend(operand_facts.iter().copied());
                derived
            }
            _ => derived,
        };
        let weak_ctor = sig.as_ref().is_some_and(|s| s.method() == "getInstance")
            && call.args().iter().any(|v| get(v).text.as_deref().is_some_and(|t| WEAK.contains(&t)));
        vec![Val { facts, owner: static_sig.map(|s| s.owner().to_string()), text: None, weak_ctor }]
    }

    /// Dense source ids: system sites in node order, then user sites in node order.
    pub fn source_ids(&self) -> BTreeMap<AdgNode, SourceId> {
        let system = self.obs.sources.iter().filter(|(_, s)| s.origin == Origin::System);
        let user = self.obs.sources.iter().filter(|(_, s)| s.origin == Origin::User);
        system.chain(user).enumerate().map(|(i, (&n, _))| (n, SourceId(i))).collect()
    }

    /// `(kind, node, sources)` for every finding the observations imply.
    pub fn findings(&self) -> BTreeSet<(FindingKind, AdgNode, Vec<SourceId>)> {
        let ids = self.source_ids();
        let mut out = BTreeSet::new();
        for (&site, &id) in &ids {
            out.insert((FindingKind::SourceInventory, site, vec![id]));
            out.insert((FindingKind::ManipulationProfile, site, vec![id]));
        }
        for (&node, (_, facts)) in &self.obs.sinks {
            let mut by: BTreeMap<AdgNode, (BTreeSet<OStatus>, bool)> = BTreeMap::new();
            for f in facts {
                let e = by.entry(f.site).or_default();
                e.0.insert(f.status);
                e.1 |= f.derived;
            }
            for (site, (st, derived)) in by {
                let id = vec![ids[&site]];
                let raw = st.contains(&OStatus::Raw);
                let pseudo = st.iter().any(|s| matches!(s, OStatus::Pseudo(_)));
                if raw && !pseudo {
                    out.insert((FindingKind::SharedBeforePseudonymized, node, id.clone()));
                } else if raw && pseudo {
                    out.insert((FindingKind::NotPseudonymizedAllPaths, node, id.clone()));
                } else if st.contains(&OStatus::Pseudo(Grade::Weak)) {
                    out.insert((FindingKind::WeakPseudonymization, node, id.clone()));
                }
                if derived {
                    out.insert((FindingKind::DerivedDataShared, node, id));
                }
            }
        }
        for (&node, facts) in &self.obs.combined {
            let indirect: BTreeSet<SourceId> = facts
                .iter()
                .filter(|f| self.obs.sources[&f.site].identifiability == Identifiability::Indirect)
                .map(|f| ids[&f.site])
                .collect();
            if indirect.len() >= 2 {
                out.insert((FindingKind::CombinationOfIndirectIdentifiers, node, indirect.into_iter().collect()));
            }
        }
        out
    }
}

/// Library facts rekeyed by source site.
pub fn by_site(facts: &BTreeSet<TaintFact>, inv: &SourceInventory) -> OFacts {
    facts
        .iter()
        .map(|f| OFact {
            site: inv.get(f.source).expect("fact source in inventory").site,
            status: match f.status {
                Status::Raw => OStatus::Raw,
                Status::Pseudonymized(g) => OStatus::Pseudo(g),
            },
            derived: f.derived,
        })
        .collect()
}

/// Oracle observations missing from the fixpoint, as readable strings.
pub fn unsound_points(o: &Oracle<'_>, ts: &TaintState, inv: &SourceInventory) -> Vec<String> {
    let mut missing = Vec::new();
    for ((node, var), facts) in &o.obs.before {
        let have = by_site(ts.facts_before(*node, *var), inv);
        if !facts.is_subset(&have) {
            missing.push(format!("before {node} {var}: oracle {facts:?} vs {have:?}"));
        }
    }
    for ((node, var), facts) in &o.obs.after {
        let have = by_site(ts.facts_after(*node, *var), inv);
        if !facts.is_subset(&have) {
            missing.push(format!("after {node} {var}: oracle {facts:?} vs {have:?}"));
        }
    }
    missing
}
