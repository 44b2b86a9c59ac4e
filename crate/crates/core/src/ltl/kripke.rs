use std::collections::{BTreeSet, VecDeque};

use std::fmt::Write as _;

use crate::automata::dot::{dot_string, io_label, START_NODE};
use crate::cpm::AnnotatedMachine;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeEdge {
    pub to: usize,
    /// The Mealy input and output behind the edge, kept for concretizing
    /// counterexamples.
    pub input: String,
    pub output: String,
}

/// A Kripke structure with a single initial state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Kripke {
    pub names: Vec<String>,
    pub labels: Vec<BTreeSet<String>>,
    /// Marks the internal (τ) states.
    pub internal: Vec<bool>,
    pub edges: Vec<Vec<KripkeEdge>>,
    pub initial: usize,
}

impl Kripke {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn add_state(&mut self, name: &str, labels: BTreeSet<String>) -> usize {
        self.names.push(name.to_string());
        self.labels.push(labels);
        self.internal.push(false);
        self.edges.push(Vec::new());
        self.names.len() - 1
    }

    pub fn add_internal_state(&mut self, name: &str, labels: BTreeSet<String>) -> usize {
        let s = self.add_state(name, labels);
        self.internal[s] = true;
        s
    }

    pub fn add_edge(&mut self, from: usize, to: usize, input: &str, output: &str) {
        self.edges[from].push(KripkeEdge { to, input: input.to_string(), output: output.to_string() });
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges[s].iter().map(|e| e.to)
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges[from].iter().any(|e| e.to == to)
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&KripkeEdge> {
        self.edges[from].iter().find(|e| e.to == to)
    }

    /// Gives every state without successors a self-loop with empty input and
    /// output.
    pub fn make_total(&mut self) {
        for s in 0..self.num_states() {
            if self.edges[s].is_empty() {
                self.add_edge(s, s, "", "");
            }
        }
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        order
    }

    /// Every proposition on some state.
    pub fn propositions(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }
}

/// States of `a` (with labels), then its τ-states labeled with labels and
/// temporaries, connected as in the expanded graph.
pub fn kripke_from_annotated(a: &AnnotatedMachine) -> Kripke {
    let mut k = Kripke::default();
    let n = a.machine().num_states();
    for node in 0..a.num_nodes() {
        if node < n {
            k.add_state(a.node_name(node), a.node_labels(node));
        } else {
            k.add_internal_state(a.node_name(node), a.node_labels(node));
        }
    }
    k.initial = a.machine().initial();
    for (from, to, input, output) in a.expanded_edges() {
        k.add_edge(from, to, input, output);
    }
    k.make_total();
    k
}

/// Renders a Kripke structure as DOT: `name {P1,P2}` per state, internal
/// states as diamonds, edges labeled with their Mealy input and output.
pub fn emit_kripke_dot(k: &Kripke) -> String {
    let mut s = String::from("digraph kripke {\n");
    let _ = writeln!(s, "  {START_NODE} [shape=point];");
    for (n, name) in k.names.iter().enumerate() {
        let labels: Vec<&str> = k.labels[n].iter().map(String::as_str).collect();
        let shape = if k.internal[n] { "diamond" } else { "circle" };
        let label = format!("{name} {{{}}}", labels.join(","));
        let _ = writeln!(s, "  {} [shape={shape}, label={}];", dot_string(name), dot_string(&label));
    }
    let _ = writeln!(s, "  {START_NODE} -> {};", dot_string(&k.names[k.initial]));
    for (n, edges) in k.edges.iter().enumerate() {
        for e in edges {
            let label = dot_string(&io_label(&e.input, &e.output));
            let _ = writeln!(s, "  {} -> {} [label={label}];", dot_string(&k.names[n]), dot_string(&k.names[e.to]));
        }
    }
    s.push_str("}\n");
    s
}
