//! A small reader and writer for the GraphViz DOT subset used by learned models.
//!
//! Supported: `digraph`/`graph` headers, node and edge statements with
//! attribute lists, default `node`/`edge`/`graph` attribute statements,
//! `key=value` graph attributes, and `//`, `#`, `/* */` comments. Subgraphs
//! and edge chains longer than one hop are not supported.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::mealy::{MealyBuilder, MealyMachine};
use super::AutomataError;

/// Synthetic node whose single edge marks the initial state.
pub const START_NODE: &str = "__start";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotNode {
    pub id: String,
    pub attrs: BTreeMap<String, String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotEdge {
    pub from: String,
    pub to: String,
    pub attrs: BTreeMap<String, String>,
    pub line: usize,
}

/// Parsed DOT document. Nodes appear in first-mention order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DotGraph {
    pub name: Option<String>,
    pub nodes: Vec<DotNode>,
    pub edges: Vec<DotEdge>,
}

impl DotGraph {
    pub fn node(&self, id: &str) -> Option<&DotNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn touch(&mut self, id: &str, line: usize) -> usize {
        match self.nodes.iter().position(|n| n.id == id) {
            Some(i) => i,
            None => {
                self.nodes.push(DotNode { id: id.to_string(), attrs: BTreeMap::new(), line });
                self.nodes.len() - 1
            }
        }
    }

    /// Resolves the initial node from a `__start -> q` edge or an
    /// `initial=true` node attribute.
    pub fn initial_node(&self) -> Result<String, AutomataError> {
        let mut found: Vec<String> = self
            .edges
            .iter()
            .filter(|e| e.from == START_NODE)
            .map(|e| e.to.clone())
            .collect();
        found.extend(
            self.nodes
                .iter()
                .filter(|n| n.attrs.get("initial").is_some_and(|v| v == "true"))
                .map(|n| n.id.clone()),
        );
        found.dedup();
        match found.len() {
            0 => Err(AutomataError::MissingInitial),
            1 => Ok(found.remove(0)),
            _ => Err(AutomataError::MultipleInitial(found)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Arrow,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, AutomataError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let err = |line: usize, msg: &str| AutomataError::DotSyntax { line, message: msg.to_string() };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                loop {
                    if i + 1 >= chars.len() {
                        return Err(err(line, "unterminated comment"));
                    }
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    if chars[i] == '*' && chars[i + 1] == '/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                toks.push((Tok::Arrow, line));
                i += 2;
            }
            '-' if chars.get(i + 1) == Some(&'-') => {
                // undirected edges are read as directed
                toks.push((Tok::Arrow, line));
                i += 2;
            }
            '{' => {
                toks.push((Tok::LBrace, line));
                i += 1;
            }
            '}' => {
                toks.push((Tok::RBrace, line));
                i += 1;
            }
            '[' => {
                toks.push((Tok::LBracket, line));
                i += 1;
            }
            ']' => {
                toks.push((Tok::RBracket, line));
                i += 1;
            }
            '=' => {
                toks.push((Tok::Eq, line));
                i += 1;
            }
            ';' => {
                toks.push((Tok::Semi, line));
                i += 1;
            }
            ',' => {
                toks.push((Tok::Comma, line));
                i += 1;
            }
            '"' => {
                let start_line = line;
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(err(start_line, "unterminated string")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('\n') => line += 1,
                                Some(&other) => {
                                    s.push('\\');
                                    s.push(other);
                                }
                                None => return Err(err(start_line, "unterminated string")),
                            }
                            i += 2;
                        }
                        Some(&ch) => {
                            if ch == '\n' {
                                line += 1;
                            }
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                toks.push((Tok::Str(s), start_line));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    s.push(chars[i]);
                    i += 1;
                }
                toks.push((Tok::Ident(s), line));
            }
            other => return Err(err(line, &format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l)| *l)
            .unwrap_or(1)
    }

    fn err(&self, message: impl Into<String>) -> AutomataError {
        AutomataError::DotSyntax { line: self.line(), message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), AutomataError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn id(&mut self) -> Result<String, AutomataError> {
        match self.next() {
            Some(Tok::Ident(s)) | Some(Tok::Str(s)) => Ok(s),
            _ => {
                self.pos -= 1;
                Err(self.err("expected identifier"))
            }
        }
    }

    fn attr_list(&mut self) -> Result<BTreeMap<String, String>, AutomataError> {
        let mut attrs = BTreeMap::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(Tok::RBracket) => {
                        self.pos += 1;
                        break;
                    }
                    Some(Tok::Comma) | Some(Tok::Semi) => self.pos += 1,
                    _ => {
                        let key = self.id()?;
                        self.expect(Tok::Eq, "`=` in attribute")?;
                        let value = self.id()?;
                        attrs.insert(key, value);
                    }
                }
            }
        }
        Ok(attrs)
    }
}

/// Parses a DOT document into its node and edge statements.
pub fn parse_graph(text: &str) -> Result<DotGraph, AutomataError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut g = DotGraph::default();
    if let Some(Tok::Ident(s)) = p.peek() {
        if s == "strict" {
            p.pos += 1;
        }
    }
    match p.next() {
        Some(Tok::Ident(s)) if s == "digraph" || s == "graph" => {}
        _ => {
            p.pos -= 1;
            return Err(p.err("expected `digraph`"));
        }
    }
    if p.peek() != Some(&Tok::LBrace) {
        g.name = Some(p.id()?);
    }
    p.expect(Tok::LBrace, "`{`")?;
    loop {
        match p.peek() {
            None => return Err(p.err("missing closing `}`")),
            Some(Tok::RBrace) => {
                p.pos += 1;
                break;
            }
            Some(Tok::Semi) => p.pos += 1,
            _ => {
                let line = p.line();
                let first = p.id()?;
                match p.peek() {
                    Some(Tok::Arrow) => {
                        p.pos += 1;
                        let to = p.id()?;
                        if p.peek() == Some(&Tok::Arrow) {
                            return Err(p.err("edge chains are not supported"));
                        }
                        let attrs = p.attr_list()?;
                        g.touch(&first, line);
                        g.touch(&to, line);
                        g.edges.push(DotEdge { from: first, to, attrs, line });
                    }
                    Some(Tok::Eq) => {
                        // graph-level `key=value`
                        p.pos += 1;
                        p.id()?;
                    }
                    _ => {
                        let attrs = p.attr_list()?;
                        if matches!(first.as_str(), "node" | "edge" | "graph") {
                            continue;
                        }
                        let i = g.touch(&first, line);
                        g.nodes[i].attrs.extend(attrs);
                    }
                }
            }
        }
    }
    if p.peek().is_some() {
        return Err(p.err("trailing content after graph"));
    }
    Ok(g)
}

fn needs_symbol_quotes(sym: &str) -> bool {
    sym.is_empty()
        || sym.chars().any(|c| c.is_whitespace() || c == '/' || c == '\'' || c == '\\')
}

/// Renders a symbol for use inside an edge label.
pub fn quote_symbol(sym: &str) -> String {
    if !needs_symbol_quotes(sym) {
        return sym.to_string();
    }
    let mut s = String::from("'");
    for c in sym.chars() {
        if c == '\'' || c == '\\' {
            s.push('\\');
        }
        s.push(c);
    }
    s.push('\'');
    s
}

/// Splits an `input / output` label into its two symbols.
pub fn parse_io_label(label: &str, line: usize) -> Result<(String, String), AutomataError> {
    let err = |m: &str| AutomataError::DotSyntax {
        line,
        message: format!("bad transition label `{label}`: {m}"),
    };
    let chars: Vec<char> = label.chars().collect();
    let mut i = 0;
    let mut symbols = Vec::new();
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    for k in 0..2 {
        skip_ws(&mut i);
        let mut sym = String::new();
        if chars.get(i) == Some(&'\'') {
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err("unterminated quoted symbol")),
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let c = *chars.get(i + 1).ok_or_else(|| err("dangling escape"))?;
                        sym.push(c);
                        i += 2;
                    }
                    Some(&c) => {
                        sym.push(c);
                        i += 1;
                    }
                }
            }
        } else {
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '/' {
                sym.push(chars[i]);
                i += 1;
            }
            if sym.is_empty() {
                return Err(err("empty symbol"));
            }
        }
        symbols.push(sym);
        skip_ws(&mut i);
        if k == 0 {
            if chars.get(i) != Some(&'/') {
                return Err(err("missing `/`"));
            }
            i += 1;
        }
    }
    if i != chars.len() {
        return Err(err("trailing characters"));
    }
    let output = symbols.pop().unwrap();
    let input = symbols.pop().unwrap();
    Ok((input, output))
}

pub fn io_label(input: &str, output: &str) -> String {
    format!("{} / {}", quote_symbol(input), quote_symbol(output))
}

/// Escapes a string for a double-quoted DOT id.
pub fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Reads a Mealy machine from DOT. Node attributes other than `initial`
/// are ignored, so annotated exports parse as their underlying machine
/// as long as they carry no internal states.
pub fn parse_dot(text: &str) -> Result<MealyMachine, AutomataError> {
    parse_dot_with(text, false)
}

/// Like [`parse_dot`], optionally completing missing transitions with
/// `no_response` self-loops.
pub fn parse_dot_with(text: &str, complete: bool) -> Result<MealyMachine, AutomataError> {
    let g = parse_graph(text)?;
    mealy_from_graph(&g, complete)
}

pub(crate) fn mealy_from_graph(g: &DotGraph, complete: bool) -> Result<MealyMachine, AutomataError> {
    let initial = g.initial_node()?;
    let mut b = MealyBuilder::default().initial(&initial).complete_with_self_loops(complete);
    for n in &g.nodes {
        if n.id != START_NODE {
            b = b.state(&n.id);
        }
    }
    let mut seen: BTreeMap<(String, String), (String, String)> = BTreeMap::new();
    for e in &g.edges {
        if e.from == START_NODE {
            continue;
        }
        let label = e.attrs.get("label").ok_or(AutomataError::DotSyntax {
            line: e.line,
            message: "transition without label".into(),
        })?;
        let (input, output) = parse_io_label(label, e.line)?;
        if let Some(prev) = seen.get(&(e.from.clone(), input.clone())) {
            if *prev != (e.to.clone(), output.clone()) {
                return Err(AutomataError::Nondeterministic { state: e.from.clone(), input });
            }
        }
        seen.insert((e.from.clone(), input.clone()), (e.to.clone(), output.clone()));
        b = b.transition(&e.from, &input, &output, &e.to);
    }
    b.build()
}

/// Writes a machine as DOT with a canonical `__start` pseudo-edge.
pub fn emit_dot(m: &MealyMachine) -> String {
    let mut s = String::from("digraph mealy {\n");
    let _ = writeln!(s, "  {START_NODE} [shape=point];");
    for q in m.states() {
        let _ = writeln!(s, "  {} [shape=circle];", dot_string(q));
    }
    let _ = writeln!(s, "  {START_NODE} -> {};", dot_string(m.initial_name()));
    for (q, i, next, o) in m.transitions() {
        let _ = writeln!(
            s,
            "  {} -> {} [label={}];",
            dot_string(m.state_name(q)),
            dot_string(m.state_name(next)),
            dot_string(&io_label(m.input_name(i), m.output_name(o)))
        );
    }
    s.push_str("}\n");
    s
}
