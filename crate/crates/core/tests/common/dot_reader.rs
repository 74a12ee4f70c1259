//! Reader for the DOT subset: `digraph ID { ... }` with node statements, `->` edge
//! statements, `node [...]` defaults, attribute lists and quoted strings.

use std::collections::BTreeMap;

#[derive(Debug, Default, PartialEq)]
pub struct DotGraph {
    pub name: String,
    pub nodes: BTreeMap<String, BTreeMap<String, String>>,
    pub edges: Vec<(String, String, BTreeMap<String, String>)>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Quoted(String),
    Sym(&'static str),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let mut text = String::new();
            i += 1;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('"') => break,
                    Some('\\') => {
                        let next = *cs.get(i + 1).ok_or("dangling escape")?;
                        text.push(match next {
                            'n' => '\n',
                            other => other,
                        });
                        i += 2;
                    }
                    Some(&ch) => {
                        text.push(ch);
                        i += 1;
                    }
                }
            }
            i += 1;
            out.push(Tok::Quoted(text));
        } else if c == '-' && cs.get(i + 1) == Some(&'>') {
            out.push(Tok::Sym("->"));
            i += 2;
        } else if let Some(sym) = ["{", "}", "[", "]", "=", ",", ";"].iter().find(|s| s.starts_with(c)) {
            out.push(Tok::Sym(sym));
            i += 1;
        } else if c.is_alphanumeric() || c == '_' || c == '.' {
            let start = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '.') {
                i += 1;
            }
            out.push(Tok::Id(cs[start..i].iter().collect()));
        } else {
            return Err(format!("unexpected character {c:?}"));
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok, String> {
        let t = self.toks.get(self.pos).cloned().ok_or("unexpected end")?;
        self.pos += 1;
        Ok(t)
    }

    fn sym(&mut self, s: &'static str) -> Result<(), String> {
        match self.next()? {
            Tok::Sym(x) if x == s => Ok(()),
            other => Err(format!("expected {s}, found {other:?}")),
        }
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next()? {
            Tok::Id(s) | Tok::Quoted(s) => Ok(s),
            other => Err(format!("expected identifier, found {other:?}")),
        }
    }

    fn attrs(&mut self) -> Result<BTreeMap<String, String>, String> {
        let mut out = BTreeMap::new();
        if self.peek() != Some(&Tok::Sym("[")) {
            return Ok(out);
        }
        self.sym("[")?;
        while self.peek() != Some(&Tok::Sym("]")) {
            let k = self.id()?;
            self.sym("=")?;
            let v = self.id()?;
            out.insert(k, v);
            if self.peek() == Some(&Tok::Sym(",")) {
                self.sym(",")?;
            }
        }
        self.sym("]")?;
        Ok(out)
    }
}

pub fn parse(text: &str) -> Result<DotGraph, String> {
    let mut p = P { toks: lex(text)?, pos: 0 };
    match p.next()? {
        Tok::Id(k) if k == "digraph" => {}
        other => return Err(format!("expected digraph, found {other:?}")),
    }
    let mut g = DotGraph { name: p.id()?, ..DotGraph::default() };
    p.sym("{")?;
    while p.peek() != Some(&Tok::Sym("}")) {
        let first = p.id()?;
        if p.peek() == Some(&Tok::Sym("->")) {
            p.sym("->")?;
            let to = p.id()?;
            let attrs = p.attrs()?;
            g.edges.push((first, to, attrs));
        } else {
            let attrs = p.attrs()?;
            if first != "node" && first != "edge" && first != "graph" && g.nodes.insert(first.clone(), attrs).is_some() {
                return Err(format!("node {first} declared twice"));
            }
        }
        if p.peek() == Some(&Tok::Sym(";")) {
            p.sym(";")?;
        }
    }
    p.sym("}")?;
    if p.pos != p.toks.len() {
        return Err("trailing tokens".into());
    }
    for (a, b, _) in &g.edges {
        if !g.nodes.contains_key(a) || !g.nodes.contains_key(b) {
            return Err(format!("edge {a} -> {b} uses an undeclared node"));
        }
    }
    Ok(g)
}
