use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::CpmError;
use crate::automata::dot::{dot_string, io_label, parse_graph, parse_io_label, START_NODE};
use crate::automata::{MealyBuilder, MealyMachine, EPSILON, TAU};

/// An internal state splitting one transition `source --input/output--> target`
/// into `source --input/τ--> self --ε/output--> target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauState {
    pub name: String,
    pub source: usize,
    pub input: usize,
    pub target: usize,
    pub output: usize,
    /// Inherited from `source`.
    pub labels: BTreeSet<String>,
    pub temps: BTreeSet<String>,
}

/// A Mealy machine whose states carry proposition sets, optionally with
/// transitions split through internal τ-states carrying temporary
/// propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedMachine {
    machine: MealyMachine,
    labels: Vec<BTreeSet<String>>,
    taus: Vec<TauState>,
    tau_index: BTreeMap<(usize, usize), usize>,
}

impl AnnotatedMachine {
    pub fn new(machine: MealyMachine, labels: Vec<BTreeSet<String>>) -> Self {
        assert_eq!(machine.num_states(), labels.len());
        AnnotatedMachine { machine, labels, taus: Vec::new(), tau_index: BTreeMap::new() }
    }

    /// A machine with every label set empty.
    pub fn unlabeled(machine: MealyMachine) -> Self {
        let n = machine.num_states();
        Self::new(machine, vec![BTreeSet::new(); n])
    }

    pub(crate) fn with_taus(mut self, mut taus: Vec<TauState>) -> Self {
        taus.sort_by_key(|t| (t.source, t.input));
        self.tau_index = taus.iter().enumerate().map(|(k, t)| ((t.source, t.input), k)).collect();
        self.taus = taus;
        self
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn labels(&self, state: usize) -> &BTreeSet<String> {
        &self.labels[state]
    }

    pub fn all_labels(&self) -> &[BTreeSet<String>] {
        &self.labels
    }

    pub fn label_of(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.machine.state_id(name).map(|q| &self.labels[q])
    }

    pub fn taus(&self) -> &[TauState] {
        &self.taus
    }

    pub fn is_expanded(&self) -> bool {
        !self.taus.is_empty()
    }

    pub fn tau_for(&self, state: usize, input: usize) -> Option<&TauState> {
        self.tau_index.get(&(state, input)).map(|&k| &self.taus[k])
    }

    /// Drops every τ split, merging `σ/τ` + `ε/ω` back into `σ/ω`.
    pub fn without_taus(&self) -> AnnotatedMachine {
        AnnotatedMachine::new(self.machine.clone(), self.labels.clone())
    }

    /// Every proposition appearing on some state.
    pub fn propositions(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    pub fn temp_propositions(&self) -> BTreeSet<String> {
        self.taus.iter().flat_map(|t| t.temps.iter().cloned()).collect()
    }

    /// Number of nodes in the expanded graph (states then τ-states).
    pub fn num_nodes(&self) -> usize {
        self.machine.num_states() + self.taus.len()
    }

    pub fn node_name(&self, node: usize) -> &str {
        let n = self.machine.num_states();
        if node < n {
            self.machine.state_name(node)
        } else {
            &self.taus[node - n].name
        }
    }

    /// Labels of a node of the expanded graph; τ nodes include their temps.
    pub fn node_labels(&self, node: usize) -> BTreeSet<String> {
        let n = self.machine.num_states();
        if node < n {
            self.labels[node].clone()
        } else {
            let t = &self.taus[node - n];
            t.labels.union(&t.temps).cloned().collect()
        }
    }

    /// Edges of the expanded graph as `(from, to, input, output)` node indices
    /// and symbols. τ edges use the reserved `__tau` / `__eps` symbols.
    pub fn expanded_edges(&self) -> Vec<(usize, usize, &str, &str)> {
        let m = &self.machine;
        let n = m.num_states();
        let mut edges = Vec::new();
        for (q, i, next, o) in m.transitions() {
            match self.tau_index.get(&(q, i)) {
                Some(&k) => {
                    edges.push((q, n + k, m.input_name(i), TAU));
                    edges.push((n + k, next, EPSILON, m.output_name(o)));
                }
                None => edges.push((q, next, m.input_name(i), m.output_name(o))),
            }
        }
        edges
    }
}

fn brace_list(items: &BTreeSet<String>) -> String {
    items.iter().map(String::as_str).collect::<Vec<_>>().join(",")
}

/// Renders an annotated machine as DOT. Nodes are labeled `name {P1,P2}`;
/// τ-states are diamonds labeled `name {P1 | T1}`.
pub fn emit_annotated_dot(a: &AnnotatedMachine) -> String {
    let m = a.machine();
    let mut s = String::from("digraph annotated {\n");
    let _ = writeln!(s, "  {START_NODE} [shape=point];");
    for q in 0..m.num_states() {
        let name = m.state_name(q);
        let label = format!("{name} {{{}}}", brace_list(&a.labels[q]));
        let _ = writeln!(s, "  {} [shape=circle, label={}];", dot_string(name), dot_string(&label));
    }
    for t in &a.taus {
        let label = format!("{} {{{} | {}}}", t.name, brace_list(&t.labels), brace_list(&t.temps));
        let _ = writeln!(s, "  {} [shape=diamond, label={}];", dot_string(&t.name), dot_string(&label));
    }
    let _ = writeln!(s, "  {START_NODE} -> {};", dot_string(m.initial_name()));
    for (from, to, input, output) in a.expanded_edges() {
        let _ = writeln!(
            s,
            "  {} -> {} [label={}];",
            dot_string(a.node_name(from)),
            dot_string(a.node_name(to)),
            dot_string(&io_label(input, output))
        );
    }
    s.push_str("}\n");
    s
}

fn parse_node_label(label: &str) -> Result<(BTreeSet<String>, Option<BTreeSet<String>>), CpmError> {
    let err = || CpmError::AnnotatedDot(format!("bad node label `{label}`"));
    let Some(open) = label.rfind('{') else {
        return Ok((BTreeSet::new(), None));
    };
    let close = label.rfind('}').ok_or_else(err)?;
    if close < open {
        return Err(err());
    }
    let inner = &label[open + 1..close];
    let split = |s: &str| -> BTreeSet<String> {
        s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
    };
    Ok(match inner.split_once('|') {
        Some((l, t)) => (split(l), Some(split(t))),
        None => (split(inner), None),
    })
}

/// Reads back the output of [`emit_annotated_dot`]. Plain Mealy DOT (no
/// node labels) is accepted and yields empty label sets.
pub fn parse_annotated_dot(text: &str) -> Result<AnnotatedMachine, CpmError> {
    let g = parse_graph(text)?;
    let initial = g.initial_node()?;
    let mut node_labels: BTreeMap<String, (BTreeSet<String>, Option<BTreeSet<String>>)> =
        BTreeMap::new();
    for n in &g.nodes {
        if n.id == START_NODE {
            continue;
        }
        let parsed = match n.attrs.get("label") {
            Some(l) => parse_node_label(l)?,
            None => (BTreeSet::new(), None),
        };
        let is_tau = parsed.1.is_some() || n.attrs.get("shape").is_some_and(|s| s == "diamond");
        node_labels.insert(n.id.clone(), (parsed.0, if is_tau { Some(parsed.1.unwrap_or_default()) } else { None }));
    }
    let is_tau = |id: &str| node_labels.get(id).is_some_and(|(_, t)| t.is_some());

    // τ node -> (input from its unique predecessor, output of its ε edge, target)
    let mut into_tau: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut out_of_tau: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut plain = Vec::new();
    for e in &g.edges {
        if e.from == START_NODE {
            continue;
        }
        let label = e.attrs.get("label").ok_or_else(|| {
            CpmError::AnnotatedDot(format!("line {}: edge without label", e.line))
        })?;
        let (input, output) = parse_io_label(label, e.line)?;
        if is_tau(&e.to) {
            if output != TAU || into_tau.insert(e.to.clone(), (e.from.clone(), input)).is_some() {
                return Err(CpmError::AnnotatedDot(format!(
                    "internal state `{}` must have exactly one incoming `input / {TAU}` edge",
                    e.to
                )));
            }
        } else if is_tau(&e.from) {
            if input != EPSILON || out_of_tau.insert(e.from.clone(), (e.to.clone(), output)).is_some() {
                return Err(CpmError::AnnotatedDot(format!(
                    "internal state `{}` must have exactly one outgoing `{EPSILON} / output` edge",
                    e.from
                )));
            }
        } else {
            plain.push((e.from.clone(), input, output, e.to.clone()));
        }
    }
    let mut b = MealyBuilder::default().initial(&initial);
    for n in &g.nodes {
        if n.id != START_NODE && !is_tau(&n.id) {
            b = b.state(&n.id);
        }
    }
    for (from, input, output, to) in &plain {
        b = b.transition(from, input, output, to);
    }
    let mut pending = Vec::new();
    for (tau, (source, input)) in &into_tau {
        let (target, output) = out_of_tau.get(tau).ok_or_else(|| {
            CpmError::AnnotatedDot(format!("internal state `{tau}` has no outgoing edge"))
        })?;
        b = b.transition(source, input, output, target);
        pending.push((tau.clone(), source.clone(), input.clone()));
    }
    let machine = b.build()?;
    let labels = machine
        .states()
        .iter()
        .map(|q| node_labels.get(q).map(|(l, _)| l.clone()).unwrap_or_default())
        .collect();
    let mut taus = Vec::new();
    for (tau, source, input) in pending {
        let q = machine.state_id(&source).unwrap();
        let i = machine.input_id(&input).unwrap();
        let (target, output) = machine.step(q, i);
        let (labels, temps) = node_labels[&tau].clone();
        taus.push(TauState {
            name: tau,
            source: q,
            input: i,
            target,
            output,
            labels,
            temps: temps.unwrap_or_default(),
        });
    }
    Ok(AnnotatedMachine::new(machine, labels).with_taus(taus))
}
