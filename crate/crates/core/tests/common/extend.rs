//! Random single-rule dataset extensions and the monotonicity comparison.

use super::taint_oracle::by_site;
use privslice::dataset::{load_dataset, ApiClassification, Dataset, Identifiability, Origin, SourceRule};
use privslice::graph::{Adg, AdgNode};
use privslice::ir::Program;
use privslice::report::{analyze, AnalysisResult, Options};
use privslice::sites::{external_signatures, resolve_site};
use privslice::taint::TaintState;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Candidate rule prefixes: the full external signatures called anywhere in the
/// programs, and their shorter segment-boundary prefixes of at least two segments.
pub struct Prefixes {
    pub full: Vec<String>,
    pub partial: Vec<String>,
}

pub fn candidate_prefixes(programs: &[(Program, Adg)]) -> Prefixes {
    let mut full = BTreeSet::new();
    let mut partial = BTreeSet::new();
    for (p, adg) in programs {
        for &n in adg.nodes() {
            for sig in external_signatures(p, adg, n) {
                let parts: Vec<&str> = sig.as_str().split('.').collect();
                for k in 2..parts.len() {
                    partial.insert(parts[..k].join("."));
                }
                full.insert(sig.as_str().to_string());
            }
        }
    }
    Prefixes { full: full.into_iter().collect(), partial: partial.into_iter().collect() }
}

fn is_pseudonymizer(c: Option<ApiClassification<'_>>) -> bool {
    matches!(c, Some(ApiClassification::Pseudonymizer(_)))
}

/// Whether the extension turns a pseudonymizer call site into something else. Such
/// extensions remove pseudonymized facts by design and are excluded.
pub fn shadows_pseudonymizer(programs: &[(Program, Adg)], old: &Dataset, new: &Dataset) -> bool {
    programs.iter().any(|(p, adg)| {
        adg.nodes().iter().any(|&n| {
            is_pseudonymizer(resolve_site(p, adg, old, n).map(|t| t.classification()))
                && !is_pseudonymizer(resolve_site(p, adg, new, n).map(|t| t.classification()))
        })
    })
}

/// `d` plus one new source rule drawn from `prefixes`.
pub fn random_extension(seed: u64, d: &Dataset, programs: &[(Program, Adg)], prefixes: &Prefixes) -> (Dataset, String) {
    let mut r = super::gen::rng(seed);
    loop {
        let pool = if r.gen_bool(0.75) || prefixes.partial.is_empty() { &prefixes.full } else { &prefixes.partial };
        let prefix = pool.choose(&mut r).unwrap().clone();
        if d.sources.iter().any(|s| s.signature_prefix == prefix) {
            continue;
        }
        let mut ext = d.clone();
        ext.sources.push(SourceRule {
            signature_prefix: prefix.clone(),
            category: ["location", "device", "account", "contact", "health"].choose(&mut r).unwrap().to_string(),
            identifiability: if r.gen_bool(0.5) { Identifiability::Direct } else { Identifiability::Indirect },
            origin: Origin::System,
        });
        let ext = load_dataset(&ext.render()).expect("extension stays valid");
        if !shadows_pseudonymizer(programs, d, &ext) {
            return (ext, prefix);
        }
    }
}

fn states_by_site<'t>(
    states: impl Iterator<Item = (AdgNode, &'t privslice::taint::Env)>,
    r: &AnalysisResult,
) -> BTreeMap<(AdgNode, privslice::ir::Var), super::taint_oracle::OFacts> {
    let mut out = BTreeMap::new();
    for (n, env) in states {
        for (v, fs) in env {
            out.insert((n, *v), by_site(fs, &r.inventory));
        }
    }
    out
}

fn taint_by_site(ts: &TaintState, r: &AnalysisResult) -> Vec<BTreeMap<(AdgNode, privslice::ir::Var), super::taint_oracle::OFacts>> {
    vec![states_by_site(ts.before_states(), r), states_by_site(ts.after_states(), r)]
}

/// Checks that nothing present under `old` disappears under `new`.
pub fn check_monotone(p: &Program, old: &Dataset, new: &Dataset) -> Result<(), String> {
    let a = analyze(p.clone(), old, Options::default());
    let b = analyze(p.clone(), new, Options::default());
    if !a.merged.nodes.is_subset(&b.merged.nodes) {
        return Err(format!("{}: merged slice shrank", p.app_id));
    }
    for s in &a.slices {
        let site = a.inventory.get(s.seeds[0]).unwrap().site;
        let id = b.inventory.at_site(site).ok_or_else(|| format!("{}: source at {site} vanished", p.app_id))?.id;
        if !s.nodes.is_subset(&b.slices[id.0].nodes) {
            return Err(format!("{}: slice of {site} shrank", p.app_id));
        }
    }
    for (before, after) in taint_by_site(&a.taint, &a).iter().zip(taint_by_site(&b.taint, &b)) {
        for (key, facts) in before {
            let have = after.get(key).cloned().unwrap_or_default();
            if !facts.is_subset(&have) {
                return Err(format!("{}: facts at {} {} shrank", p.app_id, key.0, key.1));
            }
        }
    }
    Ok(())
}
