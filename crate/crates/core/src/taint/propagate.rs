use crate::dataset::{ApiClassification, Channel, Dataset, Grade};
use crate::findings::grade_pseudonymizer_call;
use crate::graph::{stmt_at, Adg, AdgNode, CfgNode, Point};
use crate::ir::{CallRef, MethodId, Program, Rhs, Sig, Stmt, Var};
use crate::sites::{resolve_site, SiteTarget};
use crate::sources::{SourceId, SourceInventory};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Raw,
    Pseudonymized(Grade),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaintFact {
    pub source: SourceId,
    pub status: Status,
    pub derived: bool,
}

impl TaintFact {
    pub fn raw(source: SourceId) -> TaintFact {
        TaintFact { source, status: Status::Raw, derived: false }
    }

    pub fn derive(self) -> TaintFact {
        TaintFact { derived: true, ..self }
    }

    pub fn pseudonymize(self, grade: Grade) -> TaintFact {
        TaintFact { status: Status::Pseudonymized(grade), ..self }
    }
}

pub type FactSet = BTreeSet<TaintFact>;
pub type Env = BTreeMap<Var, FactSet>;

/// Per-statement variable facts (before and after each reached statement), plus the
/// context-insensitive parameter and return tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaintState {
    before: BTreeMap<AdgNode, Env>,
    after: BTreeMap<AdgNode, Env>,
    params: BTreeMap<(MethodId, usize), FactSet>,
    returns: BTreeMap<MethodId, FactSet>,
    iterations: usize,
    bound: usize,
}

static EMPTY: FactSet = BTreeSet::new();

impl TaintState {
    pub fn facts_before(&self, n: AdgNode, v: Var) -> &FactSet {
        self.before.get(&n).and_then(|env| env.get(&v)).unwrap_or(&EMPTY)
    }

    pub fn facts_after(&self, n: AdgNode, v: Var) -> &FactSet {
        self.after.get(&n).and_then(|env| env.get(&v)).unwrap_or(&EMPTY)
    }

    /// Union of the facts of `vars` on entry to `n`.
    pub fn union_before(&self, n: AdgNode, vars: &[Var]) -> FactSet {
        vars.iter().flat_map(|&v| self.facts_before(n, v).iter().copied()).collect()
    }

    /// Whether the fixpoint reached `n` from its method entry.
    pub fn reached(&self, n: AdgNode) -> bool {
        self.after.contains_key(&n)
    }

    /// States on entry to each reached node.
    pub fn before_states(&self) -> impl Iterator<Item = (AdgNode, &Env)> {
        self.before.iter().map(|(&n, env)| (n, env))
    }

    /// States after each reached node.
    pub fn after_states(&self) -> impl Iterator<Item = (AdgNode, &Env)> {
        self.after.iter().map(|(&n, env)| (n, env))
    }

    pub fn param_facts(&self, m: MethodId, i: usize) -> &FactSet {
        self.params.get(&(m, i)).unwrap_or(&EMPTY)
    }

    pub fn return_facts(&self, m: MethodId) -> &FactSet {
        self.returns.get(&m).unwrap_or(&EMPTY)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Upper bound on iterations checked during the fixpoint.
    pub fn bound(&self) -> usize {
        self.bound
    }
}

struct Solver<'a> {
    p: &'a Program,
    adg: &'a Adg,
    d: &'a Dataset,
    inventory: &'a SourceInventory,
    state: TaintState,
    queue: VecDeque<(MethodId, CfgNode)>,
    queued: BTreeSet<(MethodId, CfgNode)>,
    /// `param i` statements per method and index.
    param_reads: BTreeMap<(MethodId, usize), Vec<usize>>,
}

impl Solver<'_> {
    fn push(&mut self, m: MethodId, n: CfgNode) {
        if n != CfgNode::Exit && self.queued.insert((m, n)) {
            self.queue.push_back((m, n));
        }
    }

    fn node(m: MethodId, n: CfgNode) -> AdgNode {
        match n {
            CfgNode::Stmt(i) => AdgNode::stmt(m, i),
            _ => AdgNode::entry(m),
        }
    }

    fn run(&mut self) {
        while let Some((m, n)) = self.queue.pop_front() {
            self.queued.remove(&(m, n));
            self.state.iterations += 1;
            assert!(
                self.state.iterations <= self.state.bound,
                "taint fixpoint exceeded its iteration bound ({})",
                self.state.bound
            );
            let graphs = self.adg.method_graphs(m).expect("method graphs");
            let here = Self::node(m, n);
            let input = match n {
                CfgNode::Entry => Env::new(),
                _ => {
                    let mut env = Env::new();
                    let mut any = false;
                    for &pred in graphs.cfg.preds(n) {
                        if let Some(out) = self.state.after.get(&Self::node(m, pred)) {
                            any = true;
                            for (v, fs) in out {
                                env.entry(*v).or_default().extend(fs.iter().copied());
                            }
                        }
                    }
                    if !any {
                        continue;
                    }
                    env
                }
            };
            let output = match n {
                CfgNode::Stmt(_) => self.transfer(here, &input),
                _ => input.clone(),
            };
            let previous = self.state.after.get(&here);
            let changed = previous != Some(&output);
            debug_assert!(previous.is_none_or(|old| subsumes(&output, old)), "facts shrank at {here}");
            self.state.before.insert(here, input);
            self.state.after.insert(here, output);
            if changed {
                let succs: Vec<CfgNode> = graphs.cfg.flow_succs(n).collect();
                for s in succs {
                    self.push(m, s);
                }
            }
        }
    }

    fn transfer(&mut self, here: AdgNode, input: &Env) -> Env {
        let stmt = stmt_at(self.p, here).expect("statement node");
        let facts = |v: &Var| input.get(v).cloned().unwrap_or_default();
        let mut out = input.clone();
        let assigned = match stmt {
            Stmt::Assign { dest, rhs } => Some((*dest, rhs)),
            _ => None,
        };

        let call_result = stmt.call().map(|call| self.call(here, call, input));
        let value = match (assigned, call_result) {
            (_, _) if self.inventory.at_site(here).is_some() => {
                let label = self.inventory.at_site(here).unwrap();
                let operands = stmt.call().map(|c| c.operands()).unwrap_or_default();
                let mut set: FactSet = operands.iter().flat_map(&facts).map(TaintFact::derive).collect();
                set.insert(TaintFact::raw(label.id));
                Some(set)
            }
            (Some(_), Some(result)) => Some(result),
            (Some((_, rhs)), None) => Some(match rhs {
                Rhs::Const(_) | Rhs::UiRead(_) => FactSet::new(),
                Rhs::Copy(w) => facts(w),
                Rhs::BinOp(_, a, b) => facts(a).into_iter().chain(facts(b)).map(TaintFact::derive).collect(),
                Rhs::Param(i) => self.state.param_facts(here.method, *i).clone(),
                Rhs::Call(..) | Rhs::VCall { .. } => unreachable!("calls handled above"),
            }),
            (None, _) => None,
        };

        if let (Some((dest, _)), Some(value)) = (assigned, value) {
            if value.is_empty() {
                out.remove(&dest);
            } else {
                out.insert(dest, value);
            }
        }

        if let Stmt::Return(Some(v)) = stmt {
            let fs = facts(v);
            let entry = self.state.returns.entry(here.method).or_default();
            let before = entry.len();
            entry.extend(fs);
            if entry.len() != before {
                let callers: Vec<_> = self.adg.call_graph().callers_of(here.method).collect();
                for (caller, site) in callers {
                    self.push(caller, CfgNode::Stmt(site));
                }
            }
        }
        out
    }

    /// Facts produced by a call, flowing arguments into internal callees.
    fn call(&mut self, here: AdgNode, call: CallRef<'_>, input: &Env) -> FactSet {
        let facts = |v: &Var| input.get(v).cloned().unwrap_or_default();
        let operands: FactSet = call.operands().iter().flat_map(facts).collect();
        match resolve_site(self.p, self.adg, self.d, here).expect("call site") {
            SiteTarget::Internal(targets) => {
                let mut result = FactSet::new();
                for t in targets {
                    let (_, decl) = self.p.method(t).expect("callee");
                    for (i, arg) in call.args().iter().enumerate().take(decl.param_count) {
                        let entry = self.state.params.entry((t, i)).or_default();
                        let before = entry.len();
                        entry.extend(facts(arg));
                        if entry.len() != before {
                            for j in self.param_reads.get(&(t, i)).cloned().unwrap_or_default() {
                                self.push(t, CfgNode::Stmt(j));
                            }
                        }
                    }
                    result.extend(self.state.return_facts(t).iter().copied());
                }
                result
            }
            SiteTarget::External { class: ApiClassification::Pseudonymizer(rule), .. } => {
                if operands.is_empty() {
                    return operands;
                }
                let grade = grade_pseudonymizer_call(self.p, self.adg, self.d, here).unwrap_or(rule.grade);
                operands.into_iter().map(|f| f.pseudonymize(grade)).collect()
            }
            SiteTarget::External { .. } => operands.into_iter().map(TaintFact::derive).collect(),
        }
    }
}

fn subsumes(new: &Env, old: &Env) -> bool {
    old.iter().all(|(v, fs)| new.get(v).is_some_and(|n| n.is_superset(fs)))
}

/// Worklist fixpoint over every method, each seeded at its entry.
pub fn propagate_taint(p: &Program, adg: &Adg, inventory: &SourceInventory, d: &Dataset) -> TaintState {
    let mut param_reads: BTreeMap<(MethodId, usize), Vec<usize>> = BTreeMap::new();
    let mut vars = BTreeSet::new();
    let mut cfg_size = 0;
    for (mid, _, m) in p.methods() {
        for (i, s) in m.body.iter().enumerate() {
            if let Stmt::Assign { rhs: Rhs::Param(k), .. } = s {
                param_reads.entry((mid, *k)).or_default().push(i);
            }
            vars.extend(s.def().map(|v| (mid, v)));
            vars.extend(s.uses().into_iter().map(|v| (mid, v)));
        }
        if let Some(g) = adg.method_graphs(mid) {
            cfg_size += g.cfg.nodes().len() + g.cfg.edges().count();
        }
    }
    // Every enqueue follows a strict growth of some fact set, or is a first visit.
    let facts_per_var = 6 * inventory.len();
    let growth = (vars.len() + param_reads.len() + p.method_count()) * facts_per_var + 1;
    let bound = (cfg_size + adg.edges().len() + 1) * growth;

    let mut solver = Solver {
        p,
        adg,
        d,
        inventory,
        state: TaintState { bound, ..TaintState::default() },
        queue: VecDeque::new(),
        queued: BTreeSet::new(),
        param_reads,
    };
    for (mid, _, _) in p.methods() {
        solver.push(mid, CfgNode::Entry);
    }
    solver.run();
    solver.state
}

/// Facts reaching one sink call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkFacts {
    pub node: AdgNode,
    pub channel: Channel,
    pub signature: Sig,
    pub facts: FactSet,
}

/// Sink calls with at least one tainted operand, in node order.
pub fn facts_at_sinks(ts: &TaintState, p: &Program, adg: &Adg, d: &Dataset) -> Vec<SinkFacts> {
    let mut out = Vec::new();
    for &node in adg.nodes() {
        if node.point == Point::Entry {
            continue;
        }
        let Some(SiteTarget::External { sig: Some(signature), class: ApiClassification::Sink(rule) }) =
            resolve_site(p, adg, d, node)
        else {
            continue;
        };
        let call = stmt_at(p, node).and_then(Stmt::call).expect("sink is a call");
        let facts = ts.union_before(node, &call.operands());
        if !facts.is_empty() {
            out.push(SinkFacts { node, channel: rule.channel, signature, facts });
        }
    }
    out
}
