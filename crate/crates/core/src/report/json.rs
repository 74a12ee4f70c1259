use super::AnalysisResult;
use crate::dataset::ManipulationKind;
use crate::graph::AdgNode;
use crate::ir::Program;
use serde_json::{json, Map, Value};
use std::collections::BTreeSet;

pub const SCHEMA_VERSION: &str = "1.0";

/// `{class, method, stmt}`; `stmt` is null for a method entry.
pub fn site_value(p: &Program, n: AdgNode) -> Value {
    let (class, method) = p.method(n.method).map_or(("?", "?"), |(c, m)| (c.qname.as_str(), m.name.as_str()));
    json!({ "class": class, "method": method, "stmt": n.stmt_index() })
}

fn sites<'a>(p: &Program, nodes: impl IntoIterator<Item = &'a AdgNode>) -> Value {
    Value::Array(nodes.into_iter().map(|&n| site_value(p, n)).collect())
}

pub fn report_value(r: &AnalysisResult) -> Value {
    let p = &r.program;
    let sources: Vec<Value> = r
        .inventory
        .iter()
        .map(|l| {
            json!({
                "id": l.id.0,
                "kind": l.kind,
                "category": l.category,
                "identifiability": l.identifiability,
                "signature_or_field": l.signature_or_field,
                "site": site_value(p, l.site),
            })
        })
        .collect();
    let pseudonymizers: Vec<Value> = r
        .pseudonymizers
        .iter()
        .map(|s| json!({ "signature": s.signature.as_str(), "rule": s.rule, "grade": s.grade, "site": site_value(p, s.node) }))
        .collect();
    let sinks: Vec<Value> = r
        .sinks
        .iter()
        .map(|s| {
            let ids: BTreeSet<usize> = s.facts.iter().map(|f| f.source.0).collect();
            json!({ "signature": s.signature.as_str(), "channel": s.channel, "sources": ids, "site": site_value(p, s.node) })
        })
        .collect();
    let findings: Vec<Value> = r
        .findings
        .iter()
        .map(|f| {
            json!({
                "kind": f.kind,
                "site": site_value(p, f.node),
                "sources": f.sources.iter().map(|s| s.0).collect::<Vec<_>>(),
                "detail": f.detail,
            })
        })
        .collect();
    let profile: Map<String, Value> = ManipulationKind::ALL
        .iter()
        .map(|&k| (k.as_str().to_string(), Value::Array(r.profile.nodes(k).map(|n| site_value(p, n)).collect())))
        .collect();
    let mut slices: Map<String, Value> =
        r.slices.iter().map(|s| (s.seeds[0].to_string(), sites(p, &s.nodes))).collect();
    slices.insert("merged".into(), sites(p, &r.merged.nodes));
    let diagnostics: Vec<String> = r.diagnostics.iter().map(ToString::to_string).collect();

    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "app_id": r.app_id,
        "sources": sources,
        "pseudonymizers": pseudonymizers,
        "sinks": sinks,
        "findings": findings,
        "manipulation_profile": profile,
        "slices": slices,
        "diagnostics": diagnostics,
    });
    if let Some(t) = &r.timings {
        let phases: Map<String, Value> =
            t.phases.iter().map(|(name, d)| (format!("{name}_ms"), json!(d.as_secs_f64() * 1000.0))).collect();
        report["timings"] = Value::Object(phases);
    }
    report
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Canonical JSON: sorted keys, two-space indentation, trailing newline.
pub fn render_report(r: &AnalysisResult) -> String {
    pretty(&report_value(r))
}

/// A single report, or an array of reports when several apps were analyzed.
pub fn render_reports(rs: &[AnalysisResult]) -> String {
    match rs {
        [one] => render_report(one),
        many => pretty(&Value::Array(many.iter().map(report_value).collect())),
    }
}
