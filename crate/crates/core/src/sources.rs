//! The input classification engine: labels system-centric API calls and user-provided UI
//! reads as personal-data sources.

use crate::dataset::{ApiClassification, Dataset, Identifiability, Origin};
use crate::graph::{Adg, AdgNode};
use crate::ir::{Diagnostic, DiagnosticKind, Location, Program, Rhs, Stmt};
use crate::sites::{resolve_site, SiteTarget};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceId(pub usize);

impl fmt::Display for SourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLabel {
    pub id: SourceId,
    pub site: AdgNode,
    /// `System` for API calls, `User` for UI reads.
    pub kind: Origin,
    pub category: String,
    pub identifiability: Identifiability,
    pub signature_or_field: String,
}

/// Labeled sources, system-centric first, with dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceInventory {
    labels: Vec<SourceLabel>,
}

impl SourceInventory {
    pub fn new(system: Vec<SourceLabel>, user: Vec<SourceLabel>) -> SourceInventory {
        let labels = system
            .into_iter()
            .chain(user)
            .enumerate()
            .map(|(i, l)| SourceLabel { id: SourceId(i), ..l })
            .collect();
        SourceInventory { labels }
    }

    pub fn labels(&self) -> &[SourceLabel] {
        &self.labels
    }

    pub fn get(&self, id: SourceId) -> Option<&SourceLabel> {
        self.labels.get(id.0)
    }

    pub fn at_site(&self, site: AdgNode) -> Option<&SourceLabel> {
        self.labels.iter().find(|l| l.site == site)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SourceLabel> {
        self.labels.iter()
    }
}

/// Call sites whose external target classifies as a source.
pub fn find_system_sources(p: &Program, adg: &Adg, d: &Dataset) -> Vec<SourceLabel> {
    let mut out = Vec::new();
    for &node in adg.nodes() {
        let Some(SiteTarget::External { sig: Some(sig), class: ApiClassification::Source(rule) }) =
            resolve_site(p, adg, d, node)
        else {
            continue;
        };
        out.push(SourceLabel {
            id: SourceId(out.len()),
            site: node,
            kind: Origin::System,
            category: rule.category.clone(),
            identifiability: rule.identifiability,
            signature_or_field: sig.to_string(),
        });
    }
    out
}

/// `uiread` statements of layout fields matching a UI keyword. Reads of undeclared
/// fields produce a diagnostic and no label.
pub fn find_ui_sources(p: &Program, d: &Dataset) -> (Vec<SourceLabel>, Vec<Diagnostic>) {
    let mut labels = Vec::new();
    let mut diags = Vec::new();
    for (mid, class, m) in p.methods() {
        for (i, s) in m.body.iter().enumerate() {
            let Stmt::Assign { rhs: Rhs::UiRead(field_id), .. } = s else { continue };
            let Some(field) = p.ui_field(field_id) else {
                diags.push(Diagnostic::new(
                    DiagnosticKind::UnknownUiField(field_id.clone()),
                    Location { class: Some(class.qname.clone()), method: Some(m.name.clone()), stmt: Some(i) },
                ));
                continue;
            };
            if let Some(rule) = d.match_ui_field(field) {
                labels.push(SourceLabel {
                    id: SourceId(labels.len()),
                    site: AdgNode::stmt(mid, i),
                    kind: Origin::User,
                    category: rule.category.clone(),
                    identifiability: rule.identifiability,
                    signature_or_field: field.id.clone(),
                });
            }
        }
    }
    (labels, diags)
}

pub fn classify_inputs(p: &Program, adg: &Adg, d: &Dataset) -> SourceInventory {
    let system = find_system_sources(p, adg, d);
    let (user, _) = find_ui_sources(p, d);
    SourceInventory::new(system, user)
}
