//! Pipeline orchestration and report rendering.

mod dot;
mod json;

pub use dot::{node_labels, render_dot, NodeInfo, NodeLabels, Role};
pub use json::{render_report, render_reports, report_value, site_value, SCHEMA_VERSION};

use crate::dataset::{ApiClassification, Dataset};
use crate::findings::{
    check_pseudonymization, classify_manipulations, detect_combination, detect_derived_sharing, inventory_findings,
    profile_findings, pseudonymizer_sites, sort_findings, Finding, ManipulationProfile, PseudonymizerSite,
};
use crate::graph::{build_adg, build_call_graph, Adg, AdgNode};
use crate::sites::resolve_site;
use crate::ir::{parse_program, validate, Diagnostic, ParseError, Program};
use crate::sources::{find_system_sources, find_ui_sources, SourceInventory};
use crate::taint::{facts_at_sinks, forward_slice, per_source_slices, propagate_taint, SinkFacts, Slice, TaintState};
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Options {
    pub include_ctrl: bool,
    pub timings: bool,
}

/// Wall-clock time per pipeline phase, in execution order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub phases: Vec<(&'static str, Duration)>,
}

#[derive(Debug, Clone)]
pub struct AnalysisResult {
    pub app_id: String,
    pub program: Program,
    pub adg: Adg,
    pub inventory: SourceInventory,
    /// Validation warnings and unknown UI field reads.
    pub diagnostics: Vec<Diagnostic>,
    /// One slice per source, in inventory order.
    pub slices: Vec<Slice>,
    pub merged: Slice,
    pub taint: TaintState,
    pub sinks: Vec<SinkFacts>,
    /// Every call classified as a sink, tainted or not.
    pub sink_sites: BTreeSet<AdgNode>,
    pub pseudonymizers: Vec<PseudonymizerSite>,
    pub profile: ManipulationProfile,
    pub profiles: Vec<ManipulationProfile>,
    pub findings: Vec<Finding>,
    pub timings: Option<Timings>,
}

impl AnalysisResult {
    pub fn has_risk(&self) -> bool {
        self.findings.iter().any(|f| f.kind.is_risk())
    }
}

struct Clock {
    enabled: bool,
    last: Instant,
    phases: Vec<(&'static str, Duration)>,
}

impl Clock {
    fn new(enabled: bool) -> Clock {
        Clock { enabled, last: Instant::now(), phases: Vec::new() }
    }

    fn lap(&mut self, name: &'static str) {
        if self.enabled {
            let now = Instant::now();
            self.phases.push((name, now - self.last));
            self.last = now;
        }
    }

    fn finish(self) -> Option<Timings> {
        self.enabled.then_some(Timings { phases: self.phases })
    }
}

/// Parses and analyzes one app.
pub fn analyze_source(text: &str, d: &Dataset, opts: Options) -> Result<AnalysisResult, ParseError> {
    let mut clock = Clock::new(opts.timings);
    let p = parse_program(text)?;
    clock.lap("parse");
    Ok(run_pipeline(p, d, opts, clock))
}

pub fn analyze(p: Program, d: &Dataset, opts: Options) -> AnalysisResult {
    run_pipeline(p, d, opts, Clock::new(opts.timings))
}

fn run_pipeline(p: Program, d: &Dataset, opts: Options, mut clock: Clock) -> AnalysisResult {
    let mut diagnostics = validate(&p);
    let cg = build_call_graph(&p);
    let adg = build_adg(&p, &cg);
    clock.lap("graph");

    let system = find_system_sources(&p, &adg, d);
    let (user, ui_diags) = find_ui_sources(&p, d);
    diagnostics.extend(ui_diags);
    let inventory = SourceInventory::new(system, user);
    clock.lap("sources");

    let slices = per_source_slices(&adg, &inventory, opts.include_ctrl);
    let merged = forward_slice(&adg, &inventory, opts.include_ctrl);
    let taint = propagate_taint(&p, &adg, &inventory, d);
    let sinks = facts_at_sinks(&taint, &p, &adg, d);
    clock.lap("taint");

    let pseudonymizers = pseudonymizer_sites(&p, &adg, d);
    let sink_sites = adg
        .nodes()
        .iter()
        .copied()
        .filter(|&n| {
            matches!(
                resolve_site(&p, &adg, d, n).map(|t| t.classification()),
                Some(ApiClassification::Sink(_))
            )
        })
        .collect();
    let profiles: Vec<ManipulationProfile> =
        slices.iter().map(|s| classify_manipulations(&p, &adg, s, &taint, &inventory, d)).collect();
    let profile = classify_manipulations(&p, &adg, &merged, &taint, &inventory, d);
    let mut findings = inventory_findings(&inventory);
    findings.extend(check_pseudonymization(&sinks));
    findings.extend(detect_combination(&p, &adg, &taint, &inventory));
    findings.extend(detect_derived_sharing(&sinks));
    findings.extend(profile_findings(&inventory, &profiles));
    sort_findings(&mut findings);
    debug_assert!(findings.iter().all(|f| merged.contains(f.node)), "finding outside the slices");
    clock.lap("findings");

    AnalysisResult {
        app_id: p.app_id.clone(),
        program: p,
        adg,
        inventory,
        diagnostics,
        slices,
        merged,
        taint,
        sinks,
        sink_sites,
        pseudonymizers,
        profile,
        profiles,
        findings,
        timings: clock.finish(),
    }
}

/// File-name-safe form of an app id.
pub fn file_stem(app_id: &str) -> String {
    let s: String = app_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with('.') {
        format!("app{s}")
    } else {
        s
    }
}

/// DOT files for an analysis: one per source slice and one merged, as (file name, text).
pub fn dot_files(r: &AnalysisResult) -> Vec<(String, String)> {
    let labels = node_labels(r);
    let stem = file_stem(&r.app_id);
    let mut out: Vec<(String, String)> = r
        .slices
        .iter()
        .map(|s| (format!("{stem}.slice_{}.dot", s.seeds[0]), render_dot(s, &labels)))
        .collect();
    out.push((format!("{stem}.merged.dot"), render_dot(&r.merged, &labels)));
    out
}
