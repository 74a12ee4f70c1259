use super::callgraph::CallGraph;
use super::cfg::{build_cfg, Cfg, CfgNode};
use super::dataflow::{data_deps, DataDep};
use super::postdom::{control_deps, postdominators, PostDominators};
use crate::ir::{MethodId, Program, Rhs, Stmt, Var};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Entry,
    Stmt(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdgNode {
    pub method: MethodId,
    pub point: Point,
}

impl AdgNode {
    pub fn stmt(method: MethodId, index: usize) -> AdgNode {
        AdgNode { method, point: Point::Stmt(index) }
    }

    pub fn entry(method: MethodId) -> AdgNode {
        AdgNode { method, point: Point::Entry }
    }

    pub fn stmt_index(&self) -> Option<usize> {
        match self.point {
            Point::Stmt(i) => Some(i),
            Point::Entry => None,
        }
    }
}

impl fmt::Display for AdgNode {
    /// Stable identifier, e.g. `m0_s3` or `m2_entry`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.point {
            Point::Entry => write!(f, "m{}_entry", self.method.0),
            Point::Stmt(i) => write!(f, "m{}_s{i}", self.method.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Ctrl,
    Data,
    Call,
    ParamIn,
    ParamOut,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [EdgeKind::Ctrl, EdgeKind::Data, EdgeKind::Call, EdgeKind::ParamIn, EdgeKind::ParamOut];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Ctrl => "CTRL",
            EdgeKind::Data => "DATA",
            EdgeKind::Call => "CALL",
            EdgeKind::ParamIn => "PARAM_IN",
            EdgeKind::ParamOut => "PARAM_OUT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdgEdge {
    pub kind: EdgeKind,
    pub from: AdgNode,
    pub to: AdgNode,
    /// Variable carried by DATA, PARAM_IN and PARAM_OUT edges.
    pub var: Option<Var>,
}

/// Per-method intermediate results kept alongside the ADG.
#[derive(Debug, Clone)]
pub struct MethodGraphs {
    pub cfg: Cfg,
    pub pdom: PostDominators,
    pub ctrl: BTreeSet<(CfgNode, CfgNode)>,
    pub data: BTreeSet<DataDep>,
}

impl MethodGraphs {
    pub fn build(m: &crate::ir::MethodDecl) -> MethodGraphs {
        let cfg = build_cfg(m);
        let pdom = postdominators(&cfg);
        let ctrl = control_deps(&cfg, &pdom);
        let data = data_deps(&cfg, m);
        MethodGraphs { cfg, pdom, ctrl, data }
    }
}

/// The app dependence graph.
#[derive(Debug, Clone)]
pub struct Adg {
    nodes: BTreeSet<AdgNode>,
    edges: Vec<AdgEdge>,
    out: BTreeMap<AdgNode, Vec<usize>>,
    data_in: BTreeMap<(AdgNode, Var), Vec<AdgNode>>,
    methods: Vec<MethodGraphs>,
    call_graph: CallGraph,
}

impl Adg {
    /// Assembles a graph from raw parts. Edges are sorted and deduplicated; per-method
    /// artifacts and the call graph are left empty.
    pub fn from_parts(nodes: impl IntoIterator<Item = AdgNode>, edges: impl IntoIterator<Item = AdgEdge>) -> Adg {
        Adg::assemble(nodes.into_iter().collect(), edges.into_iter().collect(), Vec::new(), CallGraph::default())
    }

    fn assemble(nodes: BTreeSet<AdgNode>, edges: BTreeSet<AdgEdge>, methods: Vec<MethodGraphs>, call_graph: CallGraph) -> Adg {
        let edges: Vec<AdgEdge> = edges.into_iter().collect();
        let mut out: BTreeMap<AdgNode, Vec<usize>> = BTreeMap::new();
        let mut data_in: BTreeMap<(AdgNode, Var), Vec<AdgNode>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            assert!(nodes.contains(&e.from) && nodes.contains(&e.to), "edge endpoints must be nodes");
            out.entry(e.from).or_default().push(i);
            if let (EdgeKind::Data, Some(v)) = (e.kind, e.var) {
                data_in.entry((e.to, v)).or_default().push(e.from);
            }
        }
        Adg { nodes, edges, out, data_in, methods, call_graph }
    }

    pub fn nodes(&self) -> &BTreeSet<AdgNode> {
        &self.nodes
    }

    /// All edges, sorted by `(kind, from, to, var)`.
    pub fn edges(&self) -> &[AdgEdge] {
        &self.edges
    }

    pub fn out_edges(&self, n: AdgNode) -> impl Iterator<Item = &AdgEdge> + '_ {
        self.out.get(&n).into_iter().flatten().map(move |&i| &self.edges[i])
    }

    /// Definitions of `var` that reach its use at `n`.
    pub fn reaching_defs(&self, n: AdgNode, var: Var) -> &[AdgNode] {
        self.data_in.get(&(n, var)).map_or(&[], Vec::as_slice)
    }

    pub fn method_graphs(&self, m: MethodId) -> Option<&MethodGraphs> {
        self.methods.get(m.0)
    }

    pub fn call_graph(&self) -> &CallGraph {
        &self.call_graph
    }
}

/// The statement an ADG node stands for; `None` for entries.
pub fn stmt_at(p: &Program, n: AdgNode) -> Option<&Stmt> {
    let (_, m) = p.method(n.method)?;
    m.body.get(n.stmt_index()?)
}

/// Per-method control and data dependences, joined by call and parameter edges for
/// every internal call-graph edge. External calls stay ordinary nodes.
pub fn build_adg(p: &Program, cg: &CallGraph) -> Adg {
    let decls: Vec<_> = p.methods().map(|(_, _, m)| m).collect();
    let methods: Vec<MethodGraphs> = decls.iter().map(|m| MethodGraphs::build(m)).collect();

    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for (idx, g) in methods.iter().enumerate() {
        let mid = MethodId(idx);
        nodes.insert(AdgNode::entry(mid));
        nodes.extend(g.cfg.stmt_nodes().map(|i| AdgNode::stmt(mid, i)));
        for &(a, b) in &g.ctrl {
            if let (CfgNode::Stmt(a), CfgNode::Stmt(b)) = (a, b) {
                edges.insert(AdgEdge { kind: EdgeKind::Ctrl, from: AdgNode::stmt(mid, a), to: AdgNode::stmt(mid, b), var: None });
            }
        }
        for d in &g.data {
            edges.insert(AdgEdge {
                kind: EdgeKind::Data,
                from: AdgNode::stmt(mid, d.def),
                to: AdgNode::stmt(mid, d.use_),
                var: Some(d.var),
            });
        }
    }

    for (&(caller, site), _) in cg.sites() {
        let stmt = &decls[caller.0].body[site];
        let call = stmt.call().expect("call-graph sites are calls");
        let site_node = AdgNode::stmt(caller, site);
        for callee in cg.internal_callees(caller, site) {
            let callee_decl = decls[callee.0];
            let callee_cfg = &methods[callee.0].cfg;
            edges.insert(AdgEdge { kind: EdgeKind::Call, from: site_node, to: AdgNode::entry(callee), var: None });

            for (i, &arg) in call.args().iter().enumerate().take(callee_decl.param_count) {
                let defs: Vec<usize> = methods[caller.0]
                    .data
                    .iter()
                    .filter(|d| d.use_ == site && d.var == arg)
                    .map(|d| d.def)
                    .collect();
                for j in callee_cfg.stmt_nodes() {
                    if matches!(callee_decl.body[j], Stmt::Assign { rhs: Rhs::Param(k), .. } if k == i) {
                        for &def in &defs {
                            edges.insert(AdgEdge {
                                kind: EdgeKind::ParamIn,
                                from: AdgNode::stmt(caller, def),
                                to: AdgNode::stmt(callee, j),
                                var: Some(arg),
                            });
                        }
                    }
                }
            }

            if stmt.def().is_some() {
                for j in callee_cfg.stmt_nodes() {
                    if let Stmt::Return(Some(v)) = callee_decl.body[j] {
                        edges.insert(AdgEdge {
                            kind: EdgeKind::ParamOut,
                            from: AdgNode::stmt(callee, j),
                            to: site_node,
                            var: Some(v),
                        });
                    }
                }
            }
        }
    }

    Adg::assemble(nodes, edges, methods, cg.clone())
}
