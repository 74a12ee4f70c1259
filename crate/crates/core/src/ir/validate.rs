use super::ast::*;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateClass(String),
    DuplicateMethod(String),
    DuplicateField(String),
    InheritanceCycle(Vec<String>),
    DuplicateLabel(String),
    UndefinedLabel(String),
    ParamOutOfRange { index: usize, param_count: usize },
    ReadBeforeWrite(Var),
    UnknownUiField(String),
}

impl DiagnosticKind {
    pub fn severity(&self) -> Severity {
        match self {
            DiagnosticKind::ReadBeforeWrite(_) | DiagnosticKind::UnknownUiField(_) => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Location {
    pub class: Option<String>,
    pub method: Option<String>,
    pub stmt: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub location: Location,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, location: Location) -> Diagnostic {
        Diagnostic { severity: kind.severity(), kind, location }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}")?;
        if let Some(c) = &self.location.class {
            write!(f, " [{c}")?;
            if let Some(m) = &self.location.method {
                write!(f, ".{m}")?;
            }
            if let Some(s) = self.location.stmt {
                write!(f, " #{s}")?;
            }
            f.write_str("]")?;
        }
        f.write_str(": ")?;
        match &self.kind {
            DiagnosticKind::DuplicateClass(c) => write!(f, "duplicate class `{c}`"),
            DiagnosticKind::DuplicateMethod(m) => write!(f, "duplicate method `{m}`"),
            DiagnosticKind::DuplicateField(id) => write!(f, "duplicate layout field id {id:?}"),
            DiagnosticKind::InheritanceCycle(cycle) => {
                write!(f, "inheritance cycle: {}", cycle.join(" -> "))
            }
            DiagnosticKind::DuplicateLabel(l) => write!(f, "label `{l}` declared more than once"),
            DiagnosticKind::UndefinedLabel(l) => write!(f, "undefined label `{l}`"),
            DiagnosticKind::ParamOutOfRange { index, param_count } => {
                write!(f, "`param {index}` out of range for method with {param_count} parameters")
            }
            DiagnosticKind::ReadBeforeWrite(v) => write!(f, "`{v}` read before any assignment"),
            DiagnosticKind::UnknownUiField(id) => write!(f, "uiread of undeclared layout field {id:?}"),
        }
    }
}

/// Checks every structural invariant of a program. Empty output means well-formed.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut seen = HashSet::new();
    for field in &p.layout {
        if !seen.insert(field.id.as_str()) {
            out.push(Diagnostic::new(DiagnosticKind::DuplicateField(field.id.clone()), Location::default()));
        }
    }

    let mut seen = HashSet::new();
    for class in &p.classes {
        let at_class = Location { class: Some(class.qname.clone()), ..Location::default() };
        if !seen.insert(class.qname.as_str()) {
            out.push(Diagnostic::new(DiagnosticKind::DuplicateClass(class.qname.clone()), at_class.clone()));
        }
        let mut names = HashSet::new();
        for m in &class.methods {
            if !names.insert(m.name.as_str()) {
                out.push(Diagnostic::new(DiagnosticKind::DuplicateMethod(m.name.clone()), at_class.clone()));
            }
        }
    }

    out.extend(inheritance_cycles(p));

    for class in &p.classes {
        for m in &class.methods {
            check_method(p, class, m, &mut out);
        }
    }
    out
}

fn inheritance_cycles(p: &Program) -> Vec<Diagnostic> {
    let supers: BTreeMap<&str, &str> = p
        .classes
        .iter()
        .filter_map(|c| c.superclass.as_deref().map(|s| (c.qname.as_str(), s)))
        .collect();
    let mut reported: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for class in &p.classes {
        let start = class.qname.as_str();
        if reported.contains(start) {
            continue;
        }
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&next) = supers.get(cur) {
            if next == start {
                reported.extend(chain.iter().copied());
                let mut cycle: Vec<String> = chain.iter().map(|s| s.to_string()).collect();
                cycle.push(start.to_string());
                out.push(Diagnostic::new(
                    DiagnosticKind::InheritanceCycle(cycle),
                    Location { class: Some(start.to_string()), ..Location::default() },
                ));
                break;
            }
            if chain.contains(&next) {
                // cycle not through `start`; it is reported from one of its members
                break;
            }
            chain.push(next);
            cur = next;
        }
    }
    out
}

fn check_method(p: &Program, class: &ClassDecl, m: &MethodDecl, out: &mut Vec<Diagnostic>) {
    let at = |stmt: Option<usize>| Location {
        class: Some(class.qname.clone()),
        method: Some(m.name.clone()),
        stmt,
    };

    let mut labels = HashSet::new();
    for (i, s) in m.body.iter().enumerate() {
        if let Stmt::Label(l) = s {
            if !labels.insert(l.as_str()) {
                out.push(Diagnostic::new(DiagnosticKind::DuplicateLabel(l.clone()), at(Some(i))));
            }
        }
    }

    let mut defined = HashSet::new();
    let mut warned = HashSet::new();
    for (i, s) in m.body.iter().enumerate() {
        match s {
            Stmt::Goto(t) | Stmt::If { target: t, .. } if !labels.contains(t.as_str()) => {
                out.push(Diagnostic::new(DiagnosticKind::UndefinedLabel(t.clone()), at(Some(i))));
            }
            Stmt::Assign { rhs: Rhs::Param(idx), .. } if *idx >= m.param_count => {
                out.push(Diagnostic::new(
                    DiagnosticKind::ParamOutOfRange { index: *idx, param_count: m.param_count },
                    at(Some(i)),
                ));
            }
            Stmt::Assign { rhs: Rhs::UiRead(id), .. } if p.ui_field(id).is_none() => {
                out.push(Diagnostic::new(DiagnosticKind::UnknownUiField(id.clone()), at(Some(i))));
            }
            _ => {}
        }
        for v in s.uses() {
            if !defined.contains(&v) && warned.insert(v) {
                out.push(Diagnostic::new(DiagnosticKind::ReadBeforeWrite(v), at(Some(i))));
            }
        }
        if let Some(d) = s.def() {
            defined.insert(d);
        }
    }
}
