use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{Lts, LtsEdge, LtsNode, Pending, StatespaceError};
use crate::automata::dot::{dot_string, parse_graph, START_NODE};

fn list(items: &BTreeSet<String>) -> String {
    items.iter().cloned().collect::<Vec<_>>().join(",")
}

fn node_label(n: &LtsNode) -> String {
    let pending = match &n.pending {
        Pending::Req => "pending=req".to_string(),
        Pending::Input(i) => format!("pending=input; msg={i}"),
        Pending::Output { msg, case } => format!("pending=output; msg={msg}; case={case}"),
        Pending::Timeout => "pending=timeout".to_string(),
    };
    format!("q={}; props={}; temps={}; {pending}", n.state, list(&n.props), list(&n.temps))
}

/// Writes the LTS with nodes `n0, n1, ...` labeled
/// `q=<state>; props=<list>; temps=<list>; pending=<kind>[; msg=..; case=..]`
/// and edges labeled with message names.
pub fn emit_lts_dot(lts: &Lts) -> String {
    let mut s = String::from("digraph lts {\n");
    let _ = writeln!(s, "  {START_NODE} [shape=point];");
    for (k, n) in lts.nodes.iter().enumerate() {
        let shape = if n.pending == Pending::Req { "box" } else { "ellipse" };
        let _ = writeln!(s, "  n{k} [shape={shape}, label={}];", dot_string(&node_label(n)));
    }
    let _ = writeln!(s, "  {START_NODE} -> n{};", lts.initial);
    for e in &lts.edges {
        let _ = writeln!(s, "  n{} -> n{} [label={}];", e.from, e.to, dot_string(&e.label));
    }
    s.push_str("}\n");
    s
}

fn parse_node_label(id: &str, label: &str) -> Result<LtsNode, StatespaceError> {
    let err = |m: &str| StatespaceError::Dot(format!("node `{id}`: {m}"));
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for part in label.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| err(&format!("field `{part}` has no `=`")))?;
        fields.insert(k.trim(), v.trim());
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| err(&format!("missing `{k}`")));
    let set = |v: &str| -> BTreeSet<String> {
        v.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
    };
    let pending = match get("pending")? {
        "req" => Pending::Req,
        "input" => Pending::Input(get("msg")?.to_string()),
        "output" => Pending::Output { msg: get("msg")?.to_string(), case: get("case")?.to_string() },
        "timeout" => Pending::Timeout,
        other => return Err(err(&format!("unknown pending message kind `{other}`"))),
    };
    Ok(LtsNode {
        state: get("q")?.to_string(),
        props: set(fields.get("props").copied().unwrap_or("")),
        temps: set(fields.get("temps").copied().unwrap_or("")),
        pending,
    })
}

/// Reads an LTS written by [`emit_lts_dot`] or produced elsewhere with the
/// same label grammar.
pub fn parse_lts_dot(text: &str) -> Result<Lts, StatespaceError> {
    let g = parse_graph(text)?;
    let initial_id = g.initial_node()?;
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut nodes = Vec::new();
    for n in g.nodes.iter().filter(|n| n.id != START_NODE) {
        let label = n
            .attrs
            .get("label")
            .ok_or_else(|| StatespaceError::Dot(format!("node `{}` has no label", n.id)))?;
        index.insert(&n.id, nodes.len());
        nodes.push(parse_node_label(&n.id, label)?);
    }
    let lookup = |id: &str| {
        index.get(id).copied().ok_or_else(|| StatespaceError::Dot(format!("undeclared node `{id}`")))
    };
    let mut edges = Vec::new();
    for e in g.edges.iter().filter(|e| e.from != START_NODE) {
        let label = e
            .attrs
            .get("label")
            .ok_or_else(|| StatespaceError::Dot(format!("line {}: edge without label", e.line)))?;
        edges.push(LtsEdge { from: lookup(&e.from)?, to: lookup(&e.to)?, label: label.clone() });
    }
    Ok(Lts { nodes, edges, initial: lookup(&initial_id)? })
}
