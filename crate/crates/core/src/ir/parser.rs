//! Lexer and recursive-descent parser for `.air` files.

use super::ast::*;
use super::validate::{validate, Diagnostic, Severity};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("{}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

impl ParseError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            ParseError::Invalid(d) => d,
            ParseError::Syntax { .. } => &[],
        }
    }
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(u32),
    Int(i64),
    Str(String),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(n) => format!("`r{n}`"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCTS: [&str; 17] = [
    "==", "!=", "<=", ">=", "<", ">", "=", "{", "}", "(", ")", ",", ":", ".", "+", "-", "*",
];

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, expected: &str, found: String| ParseError::Syntax {
        line,
        col,
        expected: expected.to_string(),
        found,
    };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tline, tcol) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match word.strip_prefix('r') {
                Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                    let n = digits
                        .parse()
                        .map_err(|_| err(tline, tcol, "variable index", word.clone()))?;
                    Tok::Var(n)
                }
                _ => Tok::Ident(word),
            };
            out.push(Token { tok, line: tline, col: tcol });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let n = text.parse().map_err(|_| err(tline, tcol, "integer literal", text.clone()))?;
            out.push(Token { tok: Tok::Int(n), line: tline, col: tcol });
            continue;
        }
        if c == '"' {
            i += 1;
            col += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(err(tline, tcol, "closing `\"`", "unterminated string".into()))
                    }
                    Some('"') => {
                        i += 1;
                        col += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = match chars.get(i + 1) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            Some('t') => '\t',
                            other => {
                                return Err(err(
                                    line,
                                    col,
                                    "escape sequence",
                                    format!("{:?}", other.copied().unwrap_or(' ')),
                                ))
                            }
                        };
                        s.push(esc);
                        i += 2;
                        col += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                        col += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tline, col: tcol });
            continue;
        }
        if c == '/' {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Punct("/"), line: tline, col: tcol });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                i += p.len();
                col += p.len();
                out.push(Token { tok: Tok::Punct(p), line: tline, col: tcol });
            }
            None => return Err(err(tline, tcol, "token", format!("character {c:?}"))),
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            expected: expected.to_string(),
            found: t.tok.describe(),
        })
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error("string literal"),
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error("integer"),
        }
    }

    fn usize(&mut self) -> Result<usize, ParseError> {
        let n = self.int()?;
        usize::try_from(n).or_else(|_| self.error("non-negative integer"))
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        match *self.peek() {
            Tok::Var(n) => {
                self.bump();
                Ok(Var(n))
            }
            _ => self.error("variable `r<n>`"),
        }
    }

    /// Dotted name; segments may also lex as variables (`r2` is a legal package segment).
    fn qname(&mut self) -> Result<Vec<String>, ParseError> {
        let mut segs = vec![self.segment()?];
        while self.is_punct(".") {
            self.bump();
            segs.push(self.segment()?);
        }
        Ok(segs)
    }

    fn segment(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            Tok::Var(n) => {
                let s = format!("r{n}");
                self.bump();
                Ok(s)
            }
            _ => self.error("name segment"),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.keyword("app")?;
        let app_id = self.string()?;
        let mut classes = Vec::new();
        let mut layout = Vec::new();
        loop {
            if self.is_keyword("layout") {
                self.bump();
                self.punct("{")?;
                while self.is_keyword("field") {
                    self.bump();
                    layout.push(self.field()?);
                }
                self.punct("}")?;
            } else if self.is_keyword("class") {
                classes.push(self.class()?);
            } else if *self.peek() == Tok::Eof {
                break;
            } else {
                return self.error("`layout`, `class` or end of input");
            }
        }
        Ok(Program { app_id, classes, layout })
    }

    fn field(&mut self) -> Result<UiField, ParseError> {
        let attr = |p: &mut Parser, name: &str| -> Result<String, ParseError> {
            p.keyword(name)?;
            p.punct("=")?;
            p.string()
        };
        let id = attr(self, "id")?;
        let hint = attr(self, "hint")?;
        let input_type = attr(self, "type")?;
        Ok(UiField { id, hint, input_type })
    }

    fn class(&mut self) -> Result<ClassDecl, ParseError> {
        self.keyword("class")?;
        let qname = self.qname()?.join(".");
        let superclass = if self.is_keyword("extends") {
            self.bump();
            Some(self.qname()?.join("."))
        } else {
            None
        };
        self.punct("{")?;
        let mut methods = Vec::new();
        while self.is_keyword("method") {
            methods.push(self.method()?);
        }
        self.punct("}")?;
        Ok(ClassDecl { qname, superclass, methods })
    }

    fn method(&mut self) -> Result<MethodDecl, ParseError> {
        self.keyword("method")?;
        let name = self.ident()?;
        self.punct("(")?;
        let param_count = self.usize()?;
        self.punct(")")?;
        self.punct("{")?;
        let mut body = Vec::new();
        while !self.is_punct("}") {
            body.push(self.stmt()?);
        }
        self.punct("}")?;
        Ok(MethodDecl { name, param_count, body })
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::Var(_) => {
                let dest = self.var()?;
                self.punct("=")?;
                let rhs = self.rhs()?;
                Ok(Stmt::Assign { dest, rhs })
            }
            Tok::Ident(kw) => match kw.as_str() {
                "call" => {
                    self.bump();
                    let (callee, args) = self.static_call()?;
                    Ok(Stmt::Call { callee, args })
                }
                "vcall" => {
                    self.bump();
                    let (receiver, method, args) = self.virtual_call()?;
                    Ok(Stmt::VCall { receiver, method, args })
                }
                "if" => {
                    self.bump();
                    let lhs = self.var()?;
                    let op = self.relop()?;
                    let rhs = match self.peek() {
                        Tok::Var(_) => Operand::Var(self.var()?),
                        _ => Operand::Const(self.constant()?),
                    };
                    self.keyword("goto")?;
                    let target = self.ident()?;
                    Ok(Stmt::If { lhs, op, rhs, target })
                }
                "goto" => {
                    self.bump();
                    Ok(Stmt::Goto(self.ident()?))
                }
                "return" => {
                    self.bump();
                    // `return` followed by `rN = ...` is a bare return.
                    let has_value = matches!(self.peek(), Tok::Var(_))
                        && !matches!(self.peek_at(1), Tok::Punct("="));
                    Ok(Stmt::Return(if has_value { Some(self.var()?) } else { None }))
                }
                _ => {
                    let name = self.ident()?;
                    self.punct(":")?;
                    Ok(Stmt::Label(name))
                }
            },
            _ => self.error("statement"),
        }
    }

    fn relop(&mut self) -> Result<RelOp, ParseError> {
        let op = match self.peek() {
            Tok::Punct("==") => RelOp::Eq,
            Tok::Punct("!=") => RelOp::Ne,
            Tok::Punct("<") => RelOp::Lt,
            Tok::Punct("<=") => RelOp::Le,
            Tok::Punct(">") => RelOp::Gt,
            Tok::Punct(">=") => RelOp::Ge,
            _ => return self.error("comparison operator"),
        };
        self.bump();
        Ok(op)
    }

    fn constant(&mut self) -> Result<Const, ParseError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Const::Text(s))
            }
            Tok::Int(_) => Ok(Const::Int(self.int()?)),
            Tok::Punct("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                Ok(Const::Int(-self.int()?))
            }
            _ => self.error("constant"),
        }
    }

    fn binop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Punct("+") => Some(BinOp::Add),
            Tok::Punct("-") => Some(BinOp::Sub),
            Tok::Punct("*") => Some(BinOp::Mul),
            Tok::Punct("/") => Some(BinOp::Div),
            Tok::Ident(s) if s == "concat" => Some(BinOp::Concat),
            _ => None,
        }
    }

    fn rhs(&mut self) -> Result<Rhs, ParseError> {
        match self.peek().clone() {
            Tok::Var(_) => {
                let a = self.var()?;
                match self.binop() {
                    Some(op) => {
                        self.bump();
                        let b = self.var()?;
                        Ok(Rhs::BinOp(op, a, b))
                    }
                    None => Ok(Rhs::Copy(a)),
                }
            }
            Tok::Ident(kw) if kw == "call" => {
                self.bump();
                let (sig, args) = self.static_call()?;
                Ok(Rhs::Call(sig, args))
            }
            Tok::Ident(kw) if kw == "vcall" => {
                self.bump();
                let (receiver, method, args) = self.virtual_call()?;
                Ok(Rhs::VCall { receiver, method, args })
            }
            Tok::Ident(kw) if kw == "uiread" => {
                self.bump();
                Ok(Rhs::UiRead(self.string()?))
            }
            Tok::Ident(kw) if kw == "param" => {
                self.bump();
                Ok(Rhs::Param(self.usize()?))
            }
            _ => Ok(Rhs::Const(self.constant()?)),
        }
    }

    fn static_call(&mut self) -> Result<(Sig, Vec<Var>), ParseError> {
        let start = self.pos;
        let path = self.qname()?;
        let sig = match Sig::new(path.join(".")) {
            Some(sig) => sig,
            None => {
                self.pos = start;
                return self.error("signature `Owner.method`");
            }
        };
        let args = self.arg_list()?;
        Ok((sig, args))
    }

    fn virtual_call(&mut self) -> Result<(Var, String, Vec<Var>), ParseError> {
        let receiver = self.var()?;
        self.punct(".")?;
        let method = self.ident()?;
        let args = self.arg_list()?;
        Ok((receiver, method, args))
    }

    fn arg_list(&mut self) -> Result<Vec<Var>, ParseError> {
        self.punct("(")?;
        let mut args = Vec::new();
        if !self.is_punct(")") {
            args.push(self.var()?);
            while self.is_punct(",") {
                self.bump();
                args.push(self.var()?);
            }
        }
        self.punct(")")?;
        Ok(args)
    }
}

/// Parses µIR source and rejects any program that fails validation with errors.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let toks = lex(source)?;
    let mut parser = Parser { toks, pos: 0 };
    let program = parser.program()?;
    let errors: Vec<Diagnostic> =
        validate(&program).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if errors.is_empty() {
        Ok(program)
    } else {
        Err(ParseError::Invalid(errors))
    }
}
