use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Lts, Pending, StatespaceError, REQ, TIMEOUT};
use crate::automata::{MealyMachine, EPSILON, TAU};
use crate::ltl::Kripke;
use crate::cpm::{AnnotatedMachine, TauState};

fn ill(msg: String) -> StatespaceError {
    StatespaceError::IllFormed(msg)
}

/// Every `req, input, output` path between request-waiting nodes as
/// `(from, input, output, to)`; timeouts appear with output `timeout`.
fn macro_steps(lts: &Lts) -> Result<Vec<(usize, String, String, usize)>, StatespaceError> {
    let mut succ: Vec<Vec<(usize, &str)>> = vec![Vec::new(); lts.nodes.len()];
    for e in &lts.edges {
        if e.from >= lts.nodes.len() || e.to >= lts.nodes.len() {
            return Err(ill(format!("edge {} -> {} leaves the node set", e.from, e.to)));
        }
        succ[e.from].push((e.to, &e.label));
    }
    let mut steps = Vec::new();
    for n in lts.macro_nodes() {
        for &(inp, label) in &succ[n] {
            if label != REQ {
                return Err(ill(format!("node {n} waits on a request but has a `{label}` edge")));
            }
            let Pending::Input(input) = &lts.nodes[inp].pending else {
                return Err(ill(format!("request from node {n} does not lead to an input")));
            };
            if succ[inp].is_empty() {
                return Err(ill(format!("input `{input}` at node {inp} is never handled")));
            }
            for &(out, label) in &succ[inp] {
                if label != input {
                    return Err(ill(format!("node {inp} expects `{input}` but has a `{label}` edge")));
                }
                let expected = match &lts.nodes[out].pending {
                    Pending::Output { msg, case } if case == input => msg.as_str(),
                    Pending::Timeout => TIMEOUT,
                    _ => return Err(ill(format!("input `{input}` at node {inp} is not answered"))),
                };
                if succ[out].is_empty() {
                    return Err(ill(format!("output at node {out} is never delivered")));
                }
                for &(back, label) in &succ[out] {
                    if label != expected || lts.nodes[back].pending != Pending::Req {
                        return Err(ill(format!(
                            "node {out} must deliver `{expected}` and return to a request"
                        )));
                    }
                    steps.push((n, input.clone(), expected.to_string(), back));
                }
            }
        }
    }
    Ok(steps)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CollapsedTransition {
    pub from: usize,
    pub input: String,
    pub output: String,
    pub to: usize,
    /// Temporaries set by this transition.
    pub temps: BTreeSet<String>,
}

/// A Mealy-style model that may hold several transitions per state and
/// input (after a timeout mutation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedModel {
    pub states: Vec<String>,
    pub labels: Vec<BTreeSet<String>>,
    pub initial: usize,
    /// In order of first appearance.
    pub inputs: Vec<String>,
    pub transitions: BTreeSet<CollapsedTransition>,
}

impl CollapsedModel {
    pub fn is_deterministic(&self) -> bool {
        let mut seen = HashSet::new();
        self.transitions.iter().all(|t| seen.insert((t.from, t.input.as_str())))
    }

    pub fn transitions_from<'a>(
        &'a self,
        state: usize,
        input: &'a str,
    ) -> impl Iterator<Item = &'a CollapsedTransition> + 'a {
        self.transitions.iter().filter(move |t| t.from == state && t.input == input)
    }

    /// Annotated DOT when deterministic, Kripke DOT otherwise.
    pub fn to_dot(&self) -> Result<String, StatespaceError> {
        if self.is_deterministic() {
            Ok(crate::cpm::emit_annotated_dot(&self.to_annotated()?))
        } else {
            Ok(crate::ltl::emit_kripke_dot(&self.to_kripke()))
        }
    }

    pub fn to_kripke(&self) -> Kripke {
        let mut k = Kripke::default();
        for (s, l) in self.states.iter().zip(&self.labels) {
            k.add_state(s, l.clone());
        }
        k.initial = self.initial;
        let mut used: HashSet<String> = self.states.iter().cloned().collect();
        for t in &self.transitions {
            if t.temps.is_empty() {
                k.add_edge(t.from, t.to, &t.input, &t.output);
                continue;
            }
            let mut name = format!("tau_{}_{}", self.states[t.from], t.input);
            while used.contains(&name) {
                name.push('\'');
            }
            used.insert(name.clone());
            let tau = k.add_internal_state(&name, self.labels[t.from].union(&t.temps).cloned().collect());
            k.add_edge(t.from, tau, &t.input, TAU);
            k.add_edge(tau, t.to, EPSILON, &t.output);
        }
        k.make_total();
        k
    }

    /// The deterministic model as an annotated machine; transitions that set
    /// temporaries become τ-states labeled like their source.
    pub fn to_annotated(&self) -> Result<AnnotatedMachine, StatespaceError> {
        let mut b = MealyMachine::builder().initial(&self.states[self.initial]);
        for s in &self.states {
            b = b.state(s);
        }
        for i in &self.inputs {
            b = b.input(i);
        }
        for t in &self.transitions {
            b = b.transition(&self.states[t.from], &t.input, &t.output, &self.states[t.to]);
        }
        let m = b.build()?;
        let labels = m
            .states()
            .iter()
            .map(|s| self.labels[self.states.iter().position(|x| x == s).unwrap()].clone())
            .collect();
        let mut used: HashSet<String> = self.states.iter().cloned().collect();
        let mut taus = Vec::new();
        for t in self.transitions.iter().filter(|t| !t.temps.is_empty()) {
            let mut name = format!("tau_{}_{}", self.states[t.from], t.input);
            while used.contains(&name) {
                name.push('\'');
            }
            used.insert(name.clone());
            let q = m.state_id(&self.states[t.from]).unwrap();
            let i = m.input_id(&t.input).unwrap();
            let (target, output) = m.step(q, i);
            taus.push(TauState {
                name,
                source: q,
                input: i,
                target,
                output,
                labels: self.labels[t.from].clone(),
                temps: t.temps.clone(),
            });
        }
        Ok(AnnotatedMachine::new(m, labels).with_taus(taus))
    }
}

/// Collapses macro-steps into transitions. Request-waiting nodes with the
/// same system state and propositions become one state; temporaries seen
/// right after the output become the transition's τ annotation.
pub fn collapse(lts: &Lts) -> Result<CollapsedModel, StatespaceError> {
    if lts.nodes.get(lts.initial).map(|n| &n.pending) != Some(&Pending::Req) {
        return Err(ill("initial node does not wait on a request".into()));
    }
    let mut key_index: BTreeMap<(String, BTreeSet<String>), usize> = BTreeMap::new();
    let mut keys: Vec<(String, BTreeSet<String>)> = Vec::new();
    let mut state_of = vec![usize::MAX; lts.nodes.len()];
    // initial first so it gets index 0, then macro nodes in node order
    let order = std::iter::once(lts.initial).chain(lts.macro_nodes().filter(|&n| n != lts.initial));
    for n in order {
        let node = &lts.nodes[n];
        let key = (node.state.clone(), node.props.clone());
        let k = *key_index.entry(key.clone()).or_insert_with(|| {
            keys.push(key);
            keys.len() - 1
        });
        state_of[n] = k;
    }
    let mut names = Vec::new();
    let mut taken: BTreeMap<String, usize> = BTreeMap::new();
    for (s, _) in &keys {
        let c = taken.entry(s.clone()).or_insert(0);
        names.push(if *c == 0 { s.clone() } else { format!("{s}#{c}") });
        *c += 1;
    }
    let mut inputs: Vec<String> = Vec::new();
    let mut transitions = BTreeSet::new();
    for (from, input, output, to) in macro_steps(lts)? {
        if !inputs.contains(&input) {
            inputs.push(input.clone());
        }
        transitions.insert(CollapsedTransition {
            from: state_of[from],
            input,
            output,
            to: state_of[to],
            temps: lts.nodes[to].temps.clone(),
        });
    }
    Ok(CollapsedModel {
        states: names,
        labels: keys.into_iter().map(|(_, p)| p).collect(),
        initial: 0,
        inputs,
        transitions,
    })
}
