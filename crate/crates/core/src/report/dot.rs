use super::AnalysisResult;
use crate::graph::{stmt_at, AdgNode, EdgeKind, Point};
use crate::taint::Slice;
use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Pseudonymizer,
    Sink,
    Other,
}

impl Role {
    fn shape(self) -> &'static str {
        match self {
            Role::Source => "doubleoctagon",
            Role::Pseudonymizer => "hexagon",
            Role::Sink => "box",
            Role::Other => "ellipse",
        }
    }

    fn color(self) -> &'static str {
        match self {
            Role::Source => "red",
            Role::Pseudonymizer => "darkgreen",
            Role::Sink => "blue",
            Role::Other => "black",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub role: Role,
    pub label: String,
}

pub type NodeLabels = BTreeMap<AdgNode, NodeInfo>;

/// Role and display text of every ADG node of an analysis.
pub fn node_labels(r: &AnalysisResult) -> NodeLabels {
    let p = &r.program;
    r.adg
        .nodes()
        .iter()
        .map(|&n| {
            let (class, m) = p.method(n.method).expect("node method");
            let label = match (n.point, stmt_at(p, n)) {
                (Point::Stmt(i), Some(s)) => format!("{}.{}#{i}: {s}", class.qname, m.name),
                _ => format!("{}.{} entry", class.qname, m.name),
            };
            let role = if r.inventory.at_site(n).is_some() {
                Role::Source
            } else if r.pseudonymizers.iter().any(|s| s.node == n) {
                Role::Pseudonymizer
            } else if r.sink_sites.contains(&n) {
                Role::Sink
            } else {
                Role::Other
            };
            (n, NodeInfo { role, label })
        })
        .collect()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

fn style(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::Data => "solid",
        EdgeKind::Ctrl => "dashed",
        EdgeKind::Call | EdgeKind::ParamIn | EdgeKind::ParamOut => "dotted",
    }
}

/// DOT digraph of a slice. Nodes missing from `labels` render as plain ellipses.
pub fn render_dot(slice: &Slice, labels: &NodeLabels) -> String {
    if slice.nodes.is_empty() {
        return "digraph slice {}\n".to_string();
    }
    let mut out = String::from("digraph slice {\n  node [fontname=\"monospace\"];\n");
    for n in &slice.nodes {
        let (role, text) = labels.get(n).map_or((Role::Other, n.to_string()), |i| (i.role, i.label.clone()));
        writeln!(out, "  {n} [label=\"{}\", shape={}, color={}];", escape(&text), role.shape(), role.color()).unwrap();
    }
    for e in &slice.edges {
        let label = match e.var {
            Some(v) => format!("{} {v}", e.kind.as_str()),
            None => e.kind.as_str().to_string(),
        };
        writeln!(out, "  {} -> {} [style={}, label=\"{label}\"];", e.from, e.to, style(e.kind)).unwrap();
    }
    out.push_str("}\n");
    out
}
