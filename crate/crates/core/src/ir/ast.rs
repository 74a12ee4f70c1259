//! In-memory model of a parsed app.

use std::fmt;

/// A local variable `r<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Global method identity: position in declaration order across all classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodId(pub usize);

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

/// Dotted method signature `owner.path.method`, at least two segments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sig(String);

impl Sig {
    /// Returns `None` unless `text` is a dotted path of two or more non-empty segments.
    pub fn new(text: impl Into<String>) -> Option<Sig> {
        let text = text.into();
        let segments: Vec<&str> = text.split('.').collect();
        if segments.len() < 2 || segments.iter().any(|s| s.is_empty()) {
            return None;
        }
        Some(Sig(text))
    }

    pub fn from_parts(owner: &str, method: &str) -> Option<Sig> {
        Sig::new(format!("{owner}.{method}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn owner(&self) -> &str {
        let cut = self.0.rfind('.').expect("validated signature");
        &self.0[..cut]
    }

    pub fn method(&self) -> &str {
        let cut = self.0.rfind('.').expect("validated signature");
        &self.0[cut + 1..]
    }
}

impl fmt::Display for Sig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Const {
    Int(i64),
    Text(String),
}

impl fmt::Display for Const {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const::Int(n) => write!(f, "{n}"),
            Const::Text(s) => write_quoted(f, s),
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Concat,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Concat => "concat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

/// Right-hand operand of an `if` comparison.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Var(Var),
    Const(Const),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => v.fmt(f),
            Operand::Const(c) => c.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rhs {
    Const(Const),
    Copy(Var),
    BinOp(BinOp, Var, Var),
    Call(Sig, Vec<Var>),
    VCall { receiver: Var, method: String, args: Vec<Var> },
    UiRead(String),
    Param(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign { dest: Var, rhs: Rhs },
    Call { callee: Sig, args: Vec<Var> },
    VCall { receiver: Var, method: String, args: Vec<Var> },
    If { lhs: Var, op: RelOp, rhs: Operand, target: String },
    Goto(String),
    Label(String),
    Return(Option<Var>),
}

/// The call embedded in a statement, whether or not its result is assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallRef<'a> {
    Static { callee: &'a Sig, args: &'a [Var] },
    Virtual { receiver: Var, method: &'a str, args: &'a [Var] },
}

impl CallRef<'_> {
    pub fn args(&self) -> &[Var] {
        match self {
            CallRef::Static { args, .. } | CallRef::Virtual { args, .. } => args,
        }
    }

    /// Every variable the call reads; the receiver comes first for virtual calls.
    pub fn operands(&self) -> Vec<Var> {
        match *self {
            CallRef::Static { args, .. } => args.to_vec(),
            CallRef::Virtual { receiver, args, .. } => {
                std::iter::once(receiver).chain(args.iter().copied()).collect()
            }
        }
    }
}

impl Stmt {
    pub fn def(&self) -> Option<Var> {
        match self {
            Stmt::Assign { dest, .. } => Some(*dest),
            _ => None,
        }
    }

    /// Variables read by the statement, in operand order, duplicates kept.
    pub fn uses(&self) -> Vec<Var> {
        match self {
            Stmt::Assign { rhs, .. } => match rhs {
                Rhs::Const(_) | Rhs::UiRead(_) | Rhs::Param(_) => Vec::new(),
                Rhs::Copy(v) => vec![*v],
                Rhs::BinOp(_, a, b) => vec![*a, *b],
                Rhs::Call(_, args) => args.clone(),
                Rhs::VCall { receiver, args, .. } => {
                    std::iter::once(*receiver).chain(args.iter().copied()).collect()
                }
            },
            Stmt::Call { args, .. } => args.clone(),
            Stmt::VCall { receiver, args, .. } => {
                std::iter::once(*receiver).chain(args.iter().copied()).collect()
            }
            Stmt::If { lhs, rhs, .. } => match rhs {
                Operand::Var(v) => vec![*lhs, *v],
                Operand::Const(_) => vec![*lhs],
            },
            Stmt::Return(v) => v.iter().copied().collect(),
            Stmt::Goto(_) | Stmt::Label(_) => Vec::new(),
        }
    }

    pub fn call(&self) -> Option<CallRef<'_>> {
        match self {
            Stmt::Call { callee, args } | Stmt::Assign { rhs: Rhs::Call(callee, args), .. } => {
                Some(CallRef::Static { callee, args })
            }
            Stmt::VCall { receiver, method, args }
            | Stmt::Assign { rhs: Rhs::VCall { receiver, method, args }, .. } => {
                Some(CallRef::Virtual { receiver: *receiver, method, args })
            }
            _ => None,
        }
    }

    pub fn is_label(&self) -> bool {
        matches!(self, Stmt::Label(_))
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Var]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Const(c) => c.fmt(f),
            Rhs::Copy(v) => v.fmt(f),
            Rhs::BinOp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Rhs::Call(sig, args) => {
                write!(f, "call {sig}")?;
                write_args(f, args)
            }
            Rhs::VCall { receiver, method, args } => {
                write!(f, "vcall {receiver}.{method}")?;
                write_args(f, args)
            }
            Rhs::UiRead(id) => {
                f.write_str("uiread ")?;
                write_quoted(f, id)
            }
            Rhs::Param(i) => write!(f, "param {i}"),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign { dest, rhs } => write!(f, "{dest} = {rhs}"),
            Stmt::Call { callee, args } => {
                write!(f, "call {callee}")?;
                write_args(f, args)
            }
            Stmt::VCall { receiver, method, args } => {
                write!(f, "vcall {receiver}.{method}")?;
                write_args(f, args)
            }
            Stmt::If { lhs, op, rhs, target } => {
                write!(f, "if {lhs} {} {rhs} goto {target}", op.symbol())
            }
            Stmt::Goto(l) => write!(f, "goto {l}"),
            Stmt::Label(l) => write!(f, "{l}:"),
            Stmt::Return(Some(v)) => write!(f, "return {v}"),
            Stmt::Return(None) => f.write_str("return"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDecl {
    pub name: String,
    pub param_count: usize,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassDecl {
    pub qname: String,
    pub superclass: Option<String>,
    pub methods: Vec<MethodDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UiField {
    pub id: String,
    pub hint: String,
    pub input_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub app_id: String,
    pub classes: Vec<ClassDecl>,
    pub layout: Vec<UiField>,
}

impl Program {
    /// All methods in declaration order, paired with their global id and owning class.
    pub fn methods(&self) -> impl Iterator<Item = (MethodId, &ClassDecl, &MethodDecl)> + '_ {
        self.classes
            .iter()
            .flat_map(|c| c.methods.iter().map(move |m| (c, m)))
            .enumerate()
            .map(|(i, (c, m))| (MethodId(i), c, m))
    }

    pub fn method_count(&self) -> usize {
        self.classes.iter().map(|c| c.methods.len()).sum()
    }

    pub fn method(&self, id: MethodId) -> Option<(&ClassDecl, &MethodDecl)> {
        self.methods().nth(id.0).map(|(_, c, m)| (c, m))
    }

    pub fn class(&self, qname: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.qname == qname)
    }

    pub fn ui_field(&self, id: &str) -> Option<&UiField> {
        self.layout.iter().find(|f| f.id == id)
    }
}

impl fmt::Display for Program {
    /// Renders the program back to µIR source text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("app ")?;
        write_quoted(f, &self.app_id)?;
        f.write_str("\n")?;
        if !self.layout.is_empty() {
            f.write_str("\nlayout {\n")?;
            for field in &self.layout {
                f.write_str("  field id=")?;
                write_quoted(f, &field.id)?;
                f.write_str(" hint=")?;
                write_quoted(f, &field.hint)?;
                f.write_str(" type=")?;
                write_quoted(f, &field.input_type)?;
                f.write_str("\n")?;
            }
            f.write_str("}\n")?;
        }
        for class in &self.classes {
            write!(f, "\nclass {}", class.qname)?;
            if let Some(sup) = &class.superclass {
                write!(f, " extends {sup}")?;
            }
            f.write_str(" {\n")?;
            for m in &class.methods {
                writeln!(f, "  method {}({}) {{", m.name, m.param_count)?;
                for s in &m.body {
                    writeln!(f, "    {s}")?;
                }
                f.write_str("  }\n")?;
            }
            f.write_str("}\n")?;
        }
        Ok(())
    }
}
