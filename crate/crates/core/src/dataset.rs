//! The privacy-relevant dataset: which API signatures and UI fields carry personal data,
//! disguise it, let it leave the app, or otherwise manipulate it.
//!
//! Signature rules match on dotted prefixes at segment boundaries, so the prefix
//! `java.security.MessageDigest` labels every method of that class but not
//! `java.security.MessageDigestSpi`. When several rules match, the longest prefix wins;
//! equal-length matches of different kinds resolve as source > pseudonymizer > sink >
//! manipulation.

use crate::ir::{Sig, UiField};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identifiability {
    Direct,
    Indirect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    System,
    User,
}

/// Robustness of a pseudonymization function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    Weak,
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Analytics,
    Advertising,
    Network,
    Storage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManipulationKind {
    Generation,
    Derivation,
    Retention,
    Accumulation,
    Replication,
    Sharing,
}

impl ManipulationKind {
    pub const ALL: [ManipulationKind; 6] = [
        ManipulationKind::Generation,
        ManipulationKind::Derivation,
        ManipulationKind::Retention,
        ManipulationKind::Accumulation,
        ManipulationKind::Replication,
        ManipulationKind::Sharing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ManipulationKind::Generation => "generation",
            ManipulationKind::Derivation => "derivation",
            ManipulationKind::Retention => "retention",
            ManipulationKind::Accumulation => "accumulation",
            ManipulationKind::Replication => "replication",
            ManipulationKind::Sharing => "sharing",
        }
    }
}

macro_rules! display_as_serde_name {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let v = serde_json::to_value(self).expect("unit enum serializes");
                f.write_str(v.as_str().expect("string variant"))
            }
        }
    )*};
}
display_as_serde_name!(Identifiability, Origin, Grade, Channel, ManipulationKind);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRule {
    pub signature_prefix: String,
    pub category: String,
    pub identifiability: Identifiability,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UiRule {
    pub keyword: String,
    pub category: String,
    pub identifiability: Identifiability,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoRule {
    pub signature_prefix: String,
    pub grade: Grade,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinkRule {
    pub signature_prefix: String,
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipRule {
    pub signature_prefix: String,
    pub kind: ManipulationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dataset {
    pub sources: Vec<SourceRule>,
    pub ui_keywords: Vec<UiRule>,
    pub pseudonymizers: Vec<PseudoRule>,
    pub sinks: Vec<SinkRule>,
    pub manipulations: Vec<ManipRule>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("dataset schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid dataset value at `{path}`: {message}")]
    Invalid { path: String, message: String },
    #[error("duplicate {kind} rule {key:?}")]
    Duplicate { kind: &'static str, key: String },
}

/// What the dataset says about one API signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApiClassification<'d> {
    Source(&'d SourceRule),
    Pseudonymizer(&'d PseudoRule),
    Sink(&'d SinkRule),
    Manipulation(&'d ManipRule),
    Unknown,
}

impl ApiClassification<'_> {
    pub fn is_unknown(&self) -> bool {
        matches!(self, ApiClassification::Unknown)
    }

    /// Prefix of the rule that matched, if any.
    pub fn rule_prefix(&self) -> Option<&str> {
        match self {
            ApiClassification::Source(r) => Some(&r.signature_prefix),
            ApiClassification::Pseudonymizer(r) => Some(&r.signature_prefix),
            ApiClassification::Sink(r) => Some(&r.signature_prefix),
            ApiClassification::Manipulation(r) => Some(&r.signature_prefix),
            ApiClassification::Unknown => None,
        }
    }
}

/// Parses and checks a dataset document.
pub fn load_dataset(source: &str) -> Result<Dataset, DatasetError> {
    let de = &mut serde_json::Deserializer::from_str(source);
    let mut d: Dataset = serde_path_to_error::deserialize(de).map_err(|e| DatasetError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    for rule in &mut d.ui_keywords {
        rule.keyword = rule.keyword.to_lowercase();
    }
    d.check()?;
    Ok(d)
}

impl Dataset {
    /// Canonical JSON rendering; `load_dataset` reads it back unchanged.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dataset serializes");
        s.push('\n');
        s
    }

    fn check(&self) -> Result<(), DatasetError> {
        fn prefixes<'a>(
            kind: &'static str,
            field: &str,
            items: impl Iterator<Item = &'a str>,
        ) -> Result<(), DatasetError> {
            let mut seen = HashSet::new();
            for (i, p) in items.enumerate() {
                if p.is_empty() {
                    return Err(DatasetError::Invalid {
                        path: format!("{field}[{i}].signature_prefix"),
                        message: "prefix must not be empty".into(),
                    });
                }
                if !seen.insert(p) {
                    return Err(DatasetError::Duplicate { kind, key: p.to_string() });
                }
            }
            Ok(())
        }
        prefixes("source", "sources", self.sources.iter().map(|r| r.signature_prefix.as_str()))?;
        prefixes(
            "pseudonymizer",
            "pseudonymizers",
            self.pseudonymizers.iter().map(|r| r.signature_prefix.as_str()),
        )?;
        prefixes("sink", "sinks", self.sinks.iter().map(|r| r.signature_prefix.as_str()))?;
        prefixes(
            "manipulation",
            "manipulations",
            self.manipulations.iter().map(|r| r.signature_prefix.as_str()),
        )?;

        let mut seen = HashSet::new();
        for (i, r) in self.ui_keywords.iter().enumerate() {
            if r.keyword.is_empty() {
                return Err(DatasetError::Invalid {
                    path: format!("ui_keywords[{i}].keyword"),
                    message: "keyword must not be empty".into(),
                });
            }
            if r.keyword != r.keyword.to_lowercase() {
                return Err(DatasetError::Invalid {
                    path: format!("ui_keywords[{i}].keyword"),
                    message: "keyword must be lower-case".into(),
                });
            }
            if !seen.insert(r.keyword.as_str()) {
                return Err(DatasetError::Duplicate { kind: "ui keyword", key: r.keyword.clone() });
            }
        }

        for (i, r) in self.manipulations.iter().enumerate() {
            if matches!(r.kind, ManipulationKind::Generation | ManipulationKind::Sharing) {
                return Err(DatasetError::Invalid {
                    path: format!("manipulations[{i}].kind"),
                    message: format!(
                        "`{}` is inferred from sources and sinks, not declared",
                        r.kind
                    ),
                });
            }
        }
        Ok(())
    }

    /// Longest matching rule across all kinds; ties go to the kind listed first.
    pub fn classify_signature(&self, sig: &Sig) -> ApiClassification<'_> {
        let s = sig.as_str();
        let candidates = [
            longest(s, &self.sources, |r| &r.signature_prefix).map(|r| (r.signature_prefix.len(), ApiClassification::Source(r))),
            longest(s, &self.pseudonymizers, |r| &r.signature_prefix)
                .map(|r| (r.signature_prefix.len(), ApiClassification::Pseudonymizer(r))),
            longest(s, &self.sinks, |r| &r.signature_prefix).map(|r| (r.signature_prefix.len(), ApiClassification::Sink(r))),
            longest(s, &self.manipulations, |r| &r.signature_prefix)
                .map(|r| (r.signature_prefix.len(), ApiClassification::Manipulation(r))),
        ];
        let mut best: Option<(usize, ApiClassification<'_>)> = None;
        for (len, class) in candidates.into_iter().flatten() {
            if best.is_none_or(|(b, _)| len > b) {
                best = Some((len, class));
            }
        }
        best.map_or(ApiClassification::Unknown, |(_, c)| c)
    }

    /// First keyword rule (in file order) contained in the field's hint or id, ignoring case.
    pub fn match_ui_field(&self, field: &UiField) -> Option<&UiRule> {
        let hint = field.hint.to_lowercase();
        let id = field.id.to_lowercase();
        self.ui_keywords
            .iter()
            .find(|r| hint.contains(&r.keyword) || id.contains(&r.keyword))
    }
}

/// Free-function form of [`Dataset::classify_signature`].
pub fn classify_signature<'d>(d: &'d Dataset, sig: &Sig) -> ApiClassification<'d> {
    d.classify_signature(sig)
}

/// Free-function form of [`Dataset::match_ui_field`].
pub fn match_ui_field(d: &Dataset, field: &UiField) -> Option<(String, Identifiability)> {
    d.match_ui_field(field).map(|r| (r.category.clone(), r.identifiability))
}

pub(crate) fn prefix_matches(sig: &str, prefix: &str) -> bool {
    sig == prefix || (sig.starts_with(prefix) && sig.as_bytes()[prefix.len()] == b'.')
}

fn longest<'r, R>(sig: &str, rules: &'r [R], prefix: impl Fn(&R) -> &String) -> Option<&'r R> {
    rules
        .iter()
        .filter(|r| prefix_matches(sig, prefix(r)))
        .max_by_key(|r| prefix(r).len())
}
