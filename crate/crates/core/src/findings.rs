//! Data-protection findings derived from taint results, pseudonymizer grading and the
//! manipulation profile of slices.

use crate::dataset::{ApiClassification, Channel, Dataset, Grade, Identifiability, ManipulationKind, Origin};
use crate::graph::{stmt_at, Adg, AdgNode};
use crate::ir::{CallRef, Program, Rhs, Sig, Stmt, Var};
use crate::sites::{constant_texts, defining_nodes, resolve_site, SiteTarget};
use crate::sources::{SourceId, SourceInventory};
use crate::taint::{SinkFacts, Slice, Status, TaintState};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Algorithm names that make any hash-based pseudonymizer weak.
pub const WEAK_ALGORITHMS: [&str; 2] = ["MD5", "SHA-1"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingKind {
    SourceInventory,
    WeakPseudonymization,
    SharedBeforePseudonymized,
    NotPseudonymizedAllPaths,
    CombinationOfIndirectIdentifiers,
    DerivedDataShared,
    ManipulationProfile,
}

impl FindingKind {
    pub const ALL: [FindingKind; 7] = [
        FindingKind::SourceInventory,
        FindingKind::WeakPseudonymization,
        FindingKind::SharedBeforePseudonymized,
        FindingKind::NotPseudonymizedAllPaths,
        FindingKind::CombinationOfIndirectIdentifiers,
        FindingKind::DerivedDataShared,
        FindingKind::ManipulationProfile,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::SourceInventory => "SOURCE_INVENTORY",
            FindingKind::WeakPseudonymization => "WEAK_PSEUDONYMIZATION",
            FindingKind::SharedBeforePseudonymized => "SHARED_BEFORE_PSEUDONYMIZED",
            FindingKind::NotPseudonymizedAllPaths => "NOT_PSEUDONYMIZED_ALL_PATHS",
            FindingKind::CombinationOfIndirectIdentifiers => "COMBINATION_OF_INDIRECT_IDENTIFIERS",
            FindingKind::DerivedDataShared => "DERIVED_DATA_SHARED",
            FindingKind::ManipulationProfile => "MANIPULATION_PROFILE",
        }
    }

    /// Everything except the informational inventory and profile entries.
    pub fn is_risk(self) -> bool {
        !matches!(self, FindingKind::SourceInventory | FindingKind::ManipulationProfile)
    }
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Detail {
    Source {
        kind: Origin,
        category: String,
        identifiability: Identifiability,
        signature_or_field: String,
    },
    Sink {
        channel: Channel,
        signature: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        grade: Option<Grade>,
    },
    Combination {
        categories: Vec<String>,
    },
    Profile {
        counts: BTreeMap<ManipulationKind, usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub kind: FindingKind,
    pub node: AdgNode,
    pub sources: Vec<SourceId>,
    pub detail: Detail,
}

impl Finding {
    fn key(&self) -> (FindingKind, AdgNode, &[SourceId]) {
        (self.kind, self.node, &self.sources)
    }
}

/// Sorts by kind, method, statement index, then source ids.
pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| a.key().cmp(&b.key()));
}

fn statuses_by_source(sink: &SinkFacts) -> BTreeMap<SourceId, (BTreeSet<Status>, bool)> {
    let mut by: BTreeMap<SourceId, (BTreeSet<Status>, bool)> = BTreeMap::new();
    for f in &sink.facts {
        let e = by.entry(f.source).or_default();
        e.0.insert(f.status);
        e.1 |= f.derived;
    }
    by
}

fn sink_detail(sink: &SinkFacts, grade: Option<Grade>) -> Detail {
    Detail::Sink { channel: sink.channel, signature: sink.signature.to_string(), grade }
}

/// Per sink and source: raw only, raw mixed with pseudonymized, or weakly pseudonymized only.
pub fn check_pseudonymization(sinks: &[SinkFacts]) -> Vec<Finding> {
    let mut out = Vec::new();
    for sink in sinks {
        for (source, (statuses, _)) in statuses_by_source(sink) {
            let raw = statuses.contains(&Status::Raw);
            let pseudo = statuses.iter().any(|s| matches!(s, Status::Pseudonymized(_)));
            let weak = statuses.contains(&Status::Pseudonymized(Grade::Weak));
            let (kind, grade) = match (raw, pseudo) {
                (true, false) => (FindingKind::SharedBeforePseudonymized, None),
                (true, true) => (FindingKind::NotPseudonymizedAllPaths, None),
                (false, _) if weak => (FindingKind::WeakPseudonymization, Some(Grade::Weak)),
                _ => continue,
            };
            out.push(Finding { kind, node: sink.node, sources: vec![source], detail: sink_detail(sink, grade) });
        }
    }
    out
}

pub fn detect_derived_sharing(sinks: &[SinkFacts]) -> Vec<Finding> {
    let mut out = Vec::new();
    for sink in sinks {
        for (source, (_, derived)) in statuses_by_source(sink) {
            if derived {
                out.push(Finding {
                    kind: FindingKind::DerivedDataShared,
                    node: sink.node,
                    sources: vec![source],
                    detail: sink_detail(sink, None),
                });
            }
        }
    }
    out
}

/// Variables combined by one operation: both operands of a binary operation, or all
/// operands of a call.
pub fn combined_operands(stmt: &Stmt) -> Option<Vec<Var>> {
    match stmt {
        Stmt::Assign { rhs: Rhs::BinOp(_, a, b), .. } => Some(vec![*a, *b]),
        _ => stmt.call().map(|c| c.operands()),
    }
}

/// Statements whose inputs carry at least two distinct indirect identifiers.
pub fn detect_combination(p: &Program, adg: &Adg, ts: &TaintState, inventory: &SourceInventory) -> Vec<Finding> {
    let mut out = Vec::new();
    for &node in adg.nodes() {
        let Some(operands) = stmt_at(p, node).and_then(combined_operands) else { continue };
        let sources: BTreeSet<SourceId> = ts
            .union_before(node, &operands)
            .iter()
            .map(|f| f.source)
            .filter(|s| inventory.get(*s).is_some_and(|l| l.identifiability == Identifiability::Indirect))
            .collect();
        if sources.len() >= 2 {
            let categories = sources.iter().map(|s| inventory.get(*s).unwrap().category.clone()).collect();
            out.push(Finding {
                kind: FindingKind::CombinationOfIndirectIdentifiers,
                node,
                sources: sources.into_iter().collect(),
                detail: Detail::Combination { categories },
            });
        }
    }
    out
}

fn is_weak_constant(p: &Program, adg: &Adg, node: AdgNode, v: Var) -> bool {
    constant_texts(p, adg, node, v).iter().any(|t| WEAK_ALGORITHMS.contains(&t.as_str()))
}

/// Grade of the pseudonymizer call at `node`: the rule grade, downgraded to weak when a
/// weak algorithm name reaches the call directly or through the `getInstance` call that
/// produced one of its operands. `None` if `node` is not a pseudonymizer call.
pub fn grade_pseudonymizer_call(p: &Program, adg: &Adg, d: &Dataset, node: AdgNode) -> Option<Grade> {
    let SiteTarget::External { class: ApiClassification::Pseudonymizer(rule), .. } = resolve_site(p, adg, d, node)? else {
        return None;
    };
    let operands = stmt_at(p, node)?.call()?.operands();
    let weak_here = operands.iter().any(|&v| is_weak_constant(p, adg, node, v));
    let weak_ctor = operands.iter().any(|&v| {
        defining_nodes(p, adg, node, v).into_iter().any(|def| {
            let Some(call) = stmt_at(p, def).and_then(Stmt::call) else { return false };
            let name = match call {
                CallRef::Static { callee, .. } => callee.method(),
                CallRef::Virtual { method, .. } => method,
            };
            name == "getInstance" && call.args().iter().any(|&a| is_weak_constant(p, adg, def, a))
        })
    });
    Some(if weak_here || weak_ctor { Grade::Weak } else { rule.grade })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudonymizerSite {
    pub node: AdgNode,
    pub signature: Sig,
    pub rule: String,
    pub grade: Grade,
}

/// Every call classified as a pseudonymizer, with its refined grade.
pub fn pseudonymizer_sites(p: &Program, adg: &Adg, d: &Dataset) -> Vec<PseudonymizerSite> {
    let mut out = Vec::new();
    for &node in adg.nodes() {
        if let Some(SiteTarget::External { sig: Some(signature), class: ApiClassification::Pseudonymizer(rule) }) =
            resolve_site(p, adg, d, node)
        {
            let grade = grade_pseudonymizer_call(p, adg, d, node).unwrap_or(rule.grade);
            out.push(PseudonymizerSite { node, signature, rule: rule.signature_prefix.clone(), grade });
        }
    }
    out
}

/// Slice nodes grouped by manipulation kind; kinds with no nodes are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ManipulationProfile {
    pub by_kind: BTreeMap<ManipulationKind, BTreeSet<AdgNode>>,
}

impl ManipulationProfile {
    pub fn nodes(&self, kind: ManipulationKind) -> impl Iterator<Item = AdgNode> + '_ {
        self.by_kind.get(&kind).into_iter().flatten().copied()
    }

    /// Node count per kind, including zero counts.
    pub fn counts(&self) -> BTreeMap<ManipulationKind, usize> {
        ManipulationKind::ALL.iter().map(|&k| (k, self.by_kind.get(&k).map_or(0, BTreeSet::len))).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.by_kind.is_empty()
    }
}

pub fn classify_manipulations(
    p: &Program,
    adg: &Adg,
    slice: &Slice,
    ts: &TaintState,
    inventory: &SourceInventory,
    d: &Dataset,
) -> ManipulationProfile {
    let seeds: BTreeSet<SourceId> = slice.seeds.iter().copied().collect();
    let tainted = |node: AdgNode, vars: &[Var]| ts.union_before(node, vars).iter().any(|f| seeds.contains(&f.source));
    let mut profile = ManipulationProfile::default();
    let mut add = |k: ManipulationKind, n: AdgNode| {
        profile.by_kind.entry(k).or_default().insert(n);
    };
    for &node in &slice.nodes {
        if inventory.at_site(node).is_some() {
            add(ManipulationKind::Generation, node);
        }
        let Some(stmt) = stmt_at(p, node) else { continue };
        match stmt {
            Stmt::Assign { rhs: Rhs::BinOp(_, a, b), .. } if tainted(node, &[*a, *b]) => {
                add(ManipulationKind::Derivation, node)
            }
            Stmt::Assign { rhs: Rhs::Copy(w), .. } if tainted(node, &[*w]) => add(ManipulationKind::Replication, node),
            _ => {}
        }
        let Some(call) = stmt.call() else { continue };
        if !tainted(node, &call.operands()) {
            continue;
        }
        match resolve_site(p, adg, d, node).map(|t| t.classification()) {
            Some(ApiClassification::Manipulation(rule)) => add(rule.kind, node),
            Some(ApiClassification::Sink(rule)) => {
                add(ManipulationKind::Sharing, node);
                if rule.channel == Channel::Storage {
                    add(ManipulationKind::Retention, node);
                }
            }
            _ => {}
        }
    }
    profile
}

pub fn inventory_findings(inventory: &SourceInventory) -> Vec<Finding> {
    inventory
        .iter()
        .map(|l| Finding {
            kind: FindingKind::SourceInventory,
            node: l.site,
            sources: vec![l.id],
            detail: Detail::Source {
                kind: l.kind,
                category: l.category.clone(),
                identifiability: l.identifiability,
                signature_or_field: l.signature_or_field.clone(),
            },
        })
        .collect()
}

/// One profile finding per source, located at the source site. `profiles` holds the
/// per-source profiles in inventory order.
pub fn profile_findings(inventory: &SourceInventory, profiles: &[ManipulationProfile]) -> Vec<Finding> {
    inventory
        .iter()
        .zip(profiles)
        .map(|(l, prof)| Finding {
            kind: FindingKind::ManipulationProfile,
            node: l.site,
            sources: vec![l.id],
            detail: Detail::Profile { counts: prof.counts() },
        })
        .collect()
}
