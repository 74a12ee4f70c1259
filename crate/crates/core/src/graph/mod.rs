//! Control-flow graphs, dependences, call graph and the app dependence graph (ADG).

mod adg;
mod callgraph;
mod cfg;
mod dataflow;
mod postdom;

pub use adg::{build_adg, stmt_at, Adg, AdgEdge, AdgNode, EdgeKind, MethodGraphs, Point};
pub use callgraph::{build_call_graph, CallGraph, Callee};
pub use cfg::{build_cfg, Cfg, CfgNode};
pub use dataflow::{data_deps, reaching_definitions, DataDep};
pub use postdom::{control_deps, postdominators, PostDominators};
