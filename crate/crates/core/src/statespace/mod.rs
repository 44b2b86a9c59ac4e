//! State-space generation for the two-actor template, collapse of the
//! resulting LTS back into a Mealy-style model, and round-trip checking.

mod collapse;
mod dot;

pub use collapse::{collapse, CollapsedModel, CollapsedTransition};
pub use dot::{emit_lts_dot, parse_lts_dot};

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::actorgen::{build_ir, ActorGenError, ActorModelIr};
use crate::automata::{bisimilar, synchronous_pairs, AutomataError, Equivalence};
use crate::cpm::{expand_tau, AnnotatedMachine, Cpm};
use crate::ltl::Kripke;

/// Label of the request edge.
pub const REQ: &str = "req";
/// Label of the timeout edge, and the output of timeout transitions after
/// collapsing.
pub const TIMEOUT: &str = "timeout";

pub const DEFAULT_MAX_NODES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatespaceError {
    #[error("state space exceeds {0} nodes")]
    TooLarge(usize),
    #[error("ill-formed state space: {0}")]
    IllFormed(String),
    #[error("LTS DOT: {0}")]
    Dot(String),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    ActorGen(#[from] ActorGenError),
}

/// The message a node is about to process.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pending {
    Req,
    Input(String),
    /// Output `msg` provoked by input `case`.
    Output { msg: String, case: String },
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LtsNode {
    pub state: String,
    pub props: BTreeSet<String>,
    pub temps: BTreeSet<String>,
    pub pending: Pending,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LtsEdge {
    pub from: usize,
    pub to: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    pub nodes: Vec<LtsNode>,
    pub edges: Vec<LtsEdge>,
    pub initial: usize,
}

impl Lts {
    pub fn successors(&self, node: usize) -> impl Iterator<Item = &LtsEdge> {
        self.edges.iter().filter(move |e| e.from == node)
    }

    /// Nodes waiting on a request: one per completed macro-step.
    pub fn macro_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&n| self.nodes[n].pending == Pending::Req)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Msg {
    Req,
    Input(usize),
    Output(usize, usize),
    Timeout,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    state: usize,
    props: Vec<bool>,
    temps: Vec<bool>,
    pending: Msg,
}

/// Every successor of `c` as `(edge label, next configuration)`.
fn step(ir: &ActorModelIr, c: &Config) -> Vec<(String, Config)> {
    match c.pending {
        Msg::Req => (0..ir.inputs.len())
            .map(|i| {
                let next = Config {
                    state: c.state,
                    props: c.props.clone(),
                    temps: vec![false; ir.temps.len()],
                    pending: Msg::Input(i),
                };
                (REQ.to_string(), next)
            })
            .collect(),
        Msg::Input(i) => {
            let label = ir.inputs[i].name.clone();
            let b = &ir.handlers[i].branches[c.state];
            let mut props = c.props.clone();
            for &(p, v) in &b.effects {
                props[p] = v;
            }
            let mut out = vec![(
                label.clone(),
                Config { state: b.next, props, temps: c.temps.clone(), pending: Msg::Output(b.output, i) },
            )];
            if ir.timeout.is_some() {
                let props = (0..ir.props.len()).map(|p| ir.initial_props.contains(&p)).collect();
                out.push((label, Config { state: 0, props, temps: c.temps.clone(), pending: Msg::Timeout }));
            }
            out
        }
        Msg::Output(o, case) => {
            let mut temps = c.temps.clone();
            if let Some(h) = ir.output_handler(o) {
                for t in h.temps.for_case(case) {
                    temps[t] = true;
                }
            }
            let next = Config { state: c.state, props: c.props.clone(), temps, pending: Msg::Req };
            vec![(ir.outputs[o].name.clone(), next)]
        }
        Msg::Timeout => {
            let mut temps = c.temps.clone();
            temps[ir.timeout.as_ref().expect("timeout pending only when mutated").temp] = true;
            vec![(TIMEOUT.to_string(), Config { state: c.state, props: c.props.clone(), temps, pending: Msg::Req })]
        }
    }
}

/// [`explore_with`] with the default node ceiling.
pub fn explore(ir: &ActorModelIr) -> Result<Lts, StatespaceError> {
    explore_with(ir, DEFAULT_MAX_NODES)
}

/// Breadth-first generation of every configuration reachable from the
/// constructor call. Each processed message is one edge.
pub fn explore_with(ir: &ActorModelIr, max_nodes: usize) -> Result<Lts, StatespaceError> {
    let init = Config {
        state: 0,
        props: (0..ir.props.len()).map(|p| ir.initial_props.contains(&p)).collect(),
        temps: vec![false; ir.temps.len()],
        pending: Msg::Req,
    };
    let mut index: HashMap<Config, usize> = HashMap::new();
    let mut configs = vec![init.clone()];
    index.insert(init, 0);
    let mut edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        for (label, next) in step(ir, &configs[n]) {
            let to = match index.get(&next) {
                Some(&k) => k,
                None => {
                    if configs.len() >= max_nodes {
                        return Err(StatespaceError::TooLarge(max_nodes));
                    }
                    let k = configs.len();
                    index.insert(next.clone(), k);
                    configs.push(next);
                    queue.push_back(k);
                    k
                }
            };
            edges.push(LtsEdge { from: n, to, label });
        }
    }
    let names = |flags: &[bool], vars: &[crate::actorgen::Named]| -> BTreeSet<String> {
        flags.iter().zip(vars).filter(|(f, _)| **f).map(|(_, v)| v.name.clone()).collect()
    };
    let nodes = configs
        .iter()
        .map(|c| LtsNode {
            state: ir.states[c.state].clone(),
            props: names(&c.props, &ir.props),
            temps: names(&c.temps, &ir.temps),
            pending: match c.pending {
                Msg::Req => Pending::Req,
                Msg::Input(i) => Pending::Input(ir.inputs[i].name.clone()),
                Msg::Output(o, i) => Pending::Output {
                    msg: ir.outputs[o].name.clone(),
                    case: ir.inputs[i].name.clone(),
                },
                Msg::Timeout => Pending::Timeout,
            },
        })
        .collect();
    Ok(Lts { nodes, edges, initial: 0 })
}

/// Upper bound on the node count of an explored IR: request nodes per
/// state and temporary valuation, plus at most one input, one output and one
/// timeout node per transition.
pub fn node_bound(ir: &ActorModelIr) -> usize {
    ir.states.len() * ((1usize << ir.temps.len()) + 2 * ir.inputs.len() + 1)
}

/// Kripke view of an explored state space: the collapsed model with one
/// internal state per transition that sets temporaries, labeled with the
/// source's propositions plus those temporaries.
pub fn kripke_from_lts(lts: &Lts) -> Result<Kripke, StatespaceError> {
    Ok(collapse(lts)?.to_kripke())
}

/// Outcome of a round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundTrip {
    Pass,
    Inequivalent { witness: Vec<String> },
    LabelMismatch { word: Vec<String>, expected: BTreeSet<String>, found: BTreeSet<String> },
    TempMismatch { word: Vec<String>, expected: BTreeSet<String>, found: BTreeSet<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTripReport {
    pub verdict: RoundTrip,
    pub lts_nodes: usize,
    pub lts_edges: usize,
    pub macro_states: usize,
}

impl RoundTripReport {
    pub fn passed(&self) -> bool {
        self.verdict == RoundTrip::Pass
    }
}

/// Builds the template for `a` under `cpm`, explores it, collapses it, and
/// compares the result with `a` τ-expanded under `cpm`.
pub fn verify_roundtrip(a: &AnnotatedMachine, cpm: &Cpm) -> Result<RoundTripReport, StatespaceError> {
    let expected = expand_tau(a, cpm);
    let ir = build_ir(&expected, cpm)?;
    verify_ir_roundtrip(&ir, &expected)
}

/// Round trip of a given IR against the model it should reproduce.
pub fn verify_ir_roundtrip(
    ir: &ActorModelIr,
    expected: &AnnotatedMachine,
) -> Result<RoundTripReport, StatespaceError> {
    let lts = explore(ir)?;
    let collapsed = collapse(&lts)?;
    let got = collapsed.to_annotated()?;
    Ok(RoundTripReport {
        verdict: compare(expected, &got)?,
        lts_nodes: lts.nodes.len(),
        lts_edges: lts.edges.len(),
        macro_states: collapsed.states.len(),
    })
}

/// Bisimilarity, then labels and temporaries along synchronous runs.
pub fn compare(expected: &AnnotatedMachine, got: &AnnotatedMachine) -> Result<RoundTrip, StatespaceError> {
    let (a, b) = (expected.machine(), got.machine());
    if let Equivalence::Inequivalent { witness } = bisimilar(a, b)? {
        return Ok(RoundTrip::Inequivalent { witness });
    }
    for (p, q, word) in synchronous_pairs(a, b) {
        if expected.labels(p) != got.labels(q) {
            return Ok(RoundTrip::LabelMismatch {
                word,
                expected: expected.labels(p).clone(),
                found: got.labels(q).clone(),
            });
        }
        for i in 0..a.inputs().len() {
            let j = b.input_id(a.input_name(i)).expect("alphabets checked equal");
            let te = expected.tau_for(p, i).map(|t| t.temps.clone()).unwrap_or_default();
            let tg = got.tau_for(q, j).map(|t| t.temps.clone()).unwrap_or_default();
            if te != tg {
                let mut word = word.clone();
                word.push(a.input_name(i).to_string());
                return Ok(RoundTrip::TempMismatch { word, expected: te, found: tg });
            }
        }
    }
    Ok(RoundTrip::Pass)
}

#[cfg(test)]
mod tests;
