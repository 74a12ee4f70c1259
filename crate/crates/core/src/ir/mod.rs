//! The textual app representation (`.air`): model, parser and validation.

mod ast;
mod parser;
mod validate;

pub use ast::*;
pub use parser::{parse_program, ParseError};
pub use validate::{validate, Diagnostic, DiagnosticKind, Location, Severity};

/// Target of a static call.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resolved {
    Internal(MethodId),
    External(Sig),
}

/// Internal iff the owner class is declared and declares the method itself.
/// Inherited methods are not searched.
pub fn resolve_callee(p: &Program, sig: &Sig) -> Resolved {
    p.methods()
        .find(|(_, c, m)| c.qname == sig.owner() && m.name == sig.method())
        .map(|(id, _, _)| Resolved::Internal(id))
        .unwrap_or_else(|| Resolved::External(sig.clone()))
}
