//! The two-actor system/environment template instantiated from an annotated
//! machine, its Rebeca rendering, and the timeout mutation.

mod emit;

pub use emit::emit_rebeca;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::cpm::{AnnotatedMachine, Cpm};

/// Proposition name set by the environment's timeout handler.
pub const TIMEOUT_PROP: &str = "TIMEOUT";

/// Fixed queue capacity of both rebecs.
pub const QUEUE_CAPACITY: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActorGenError {
    #[error("symbols {symbols:?} all map to the identifier `{ident}`")]
    NameCollision { ident: String, symbols: Vec<String> },
    #[error("timeout probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),
    #[error("`{TIMEOUT_PROP}` is already a proposition")]
    TimeoutCollision,
}

/// A message or variable: the abstract name and its Rebeca identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Named {
    pub name: String,
    pub ident: String,
}

/// One `if(state==q)` arm of an input handler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub state: usize,
    pub next: usize,
    /// `(proposition index, new value)`, only for propositions that change.
    pub effects: Vec<(usize, bool)>,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputHandler {
    pub input: usize,
    /// One per state, ordered by state number.
    pub branches: Vec<Branch>,
}

/// Which temporaries an output handler sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TempEffect {
    /// The same set whatever input provoked the output.
    Uniform(BTreeSet<usize>),
    /// Keyed by the input case index passed along with the output call.
    ByCase(BTreeMap<usize, BTreeSet<usize>>),
}

impl TempEffect {
    pub fn for_case(&self, case: usize) -> BTreeSet<usize> {
        match self {
            TempEffect::Uniform(s) => s.clone(),
            TempEffect::ByCase(m) => m.get(&case).cloned().unwrap_or_default(),
        }
    }

    pub fn takes_case(&self) -> bool {
        matches!(self, TempEffect::ByCase(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputHandler {
    pub output: usize,
    pub temps: TempEffect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeoutMutation {
    /// Index into `temps` of the TIMEOUT variable.
    pub temp: usize,
    /// Only used when simulating; exploration treats the choice as free.
    pub probability: f64,
}

/// The instantiated template.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorModelIr {
    /// State names; the Rebeca `state` value is the index and 0 is initial.
    pub states: Vec<String>,
    /// Input messages in case-index order.
    pub inputs: Vec<Named>,
    pub outputs: Vec<Named>,
    /// Boolean state variables of the system actor.
    pub props: Vec<Named>,
    /// Propositions true in the initial state.
    pub initial_props: BTreeSet<usize>,
    /// Boolean state variables of the environment actor.
    pub temps: Vec<Named>,
    pub handlers: Vec<InputHandler>,
    pub output_handlers: Vec<OutputHandler>,
    pub timeout: Option<TimeoutMutation>,
    pub queue_capacity: usize,
}

impl ActorModelIr {
    pub fn output_handler(&self, output: usize) -> Option<&OutputHandler> {
        self.output_handlers.iter().find(|h| h.output == output)
    }

    pub fn prop_names(&self, set: &BTreeSet<usize>) -> BTreeSet<String> {
        set.iter().map(|&p| self.props[p].name.clone()).collect()
    }

    pub fn temp_names(&self, set: &BTreeSet<usize>) -> BTreeSet<String> {
        set.iter().map(|&t| self.temps[t].name.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationConfig {
    pub timeout_enabled: bool,
    pub timeout_probability: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig { timeout_enabled: false, timeout_probability: 0.1 }
    }
}

/// Prefixes prepended to Rebeca message identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Naming {
    pub input_prefix: String,
    pub output_prefix: String,
}

const RESERVED: &[&str] = &[
    "boolean", "break", "byte", "case", "class", "data", "default", "else", "environment", "false",
    "for", "if", "int", "knownrebecs", "main", "msgsrv", "new", "null", "reactiveclass", "req",
    "return", "self", "sender", "short", "state", "statevars", "switch", "system", "tm", "true",
    "while",
];

/// Lowercases, replaces characters outside `[a-z0-9_]` by `_`, applies
/// `prefix`, and falls back to `fallback` when the result is not a usable
/// identifier.
pub fn rebeca_ident(symbol: &str, prefix: &str, fallback: &str) -> String {
    let body: String = symbol
        .chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let ident = format!("{prefix}{body}");
    let ok = ident.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
    if ok && !RESERVED.contains(&ident.as_str()) {
        ident
    } else {
        format!("{fallback}{ident}")
    }
}

fn named(
    symbols: &[String],
    prefix: &str,
    fallback: &str,
    taken: &mut HashMap<String, String>,
) -> Result<Vec<Named>, ActorGenError> {
    symbols
        .iter()
        .map(|s| {
            let ident = rebeca_ident(s, prefix, fallback);
            if let Some(prev) = taken.insert(ident.clone(), s.clone()) {
                return Err(ActorGenError::NameCollision { ident, symbols: vec![prev, s.clone()] });
            }
            Ok(Named { name: s.clone(), ident })
        })
        .collect()
}

/// [`build_ir_with`] with unprefixed identifiers.
pub fn build_ir(a: &AnnotatedMachine, cpm: &Cpm) -> Result<ActorModelIr, ActorGenError> {
    build_ir_with(a, cpm, &Naming::default())
}

/// Instantiates the template. Temporary propositions come from `cpm`'s τ
/// conditions, so `a` may or may not be τ-expanded.
pub fn build_ir_with(
    a: &AnnotatedMachine,
    cpm: &Cpm,
    naming: &Naming,
) -> Result<ActorModelIr, ActorGenError> {
    let m = a.machine();
    let n = m.num_states();
    // initial state first, then the rest in machine order
    let mut order = vec![m.initial()];
    order.extend((0..n).filter(|&q| q != m.initial()));
    let mut number = vec![0; n];
    for (k, &q) in order.iter().enumerate() {
        number[q] = k;
    }

    let prop_list: Vec<String> = a.propositions().into_iter().collect();
    let prop_index: HashMap<&str, usize> =
        prop_list.iter().enumerate().map(|(k, p)| (p.as_str(), k)).collect();
    let set_of = |labels: &BTreeSet<String>| -> BTreeSet<usize> {
        labels.iter().map(|p| prop_index[p.as_str()]).collect()
    };

    let mut temp_set: BTreeSet<String> = BTreeSet::new();
    for (_, i, _, o) in m.transitions() {
        temp_set.extend(cpm.temps_for(m.input_name(i), m.output_name(o)));
    }
    let temp_list: Vec<String> = temp_set.into_iter().collect();

    let mut taken = HashMap::new();
    let inputs = named(m.inputs(), &naming.input_prefix, "in_", &mut taken)?;
    let outputs = named(m.outputs(), &naming.output_prefix, "out_", &mut taken)?;
    let mut var_taken = HashMap::new();
    let props = named(&prop_list, "", "p_", &mut var_taken)?;
    let temps = named(&temp_list, "", "t_", &mut var_taken)?;
    let temp_index: HashMap<&str, usize> =
        temp_list.iter().enumerate().map(|(k, t)| (t.as_str(), k)).collect();

    let handlers = (0..m.inputs().len())
        .map(|i| InputHandler {
            input: i,
            branches: order
                .iter()
                .map(|&q| {
                    let (next, output) = m.step(q, i);
                    let (from, to) = (set_of(a.labels(q)), set_of(a.labels(next)));
                    let mut effects: Vec<(usize, bool)> = to.difference(&from).map(|&p| (p, true)).collect();
                    effects.extend(from.difference(&to).map(|&p| (p, false)));
                    effects.sort();
                    Branch { state: number[q], next: number[next], effects, output }
                })
                .collect(),
        })
        .collect();

    // cases that can provoke each output
    let mut cases: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (_, i, _, o) in m.transitions() {
        cases.entry(o).or_default().insert(i);
    }
    let output_handlers = cases
        .into_iter()
        .map(|(o, is)| {
            let per: BTreeMap<usize, BTreeSet<usize>> = is
                .iter()
                .map(|&i| {
                    let ts = cpm.temps_for(m.input_name(i), m.output_name(o));
                    (i, ts.iter().map(|t| temp_index[t.as_str()]).collect())
                })
                .collect();
            let mut distinct = per.values();
            let first = distinct.next().cloned().unwrap_or_default();
            let temps = if distinct.all(|s| *s == first) {
                TempEffect::Uniform(first)
            } else {
                TempEffect::ByCase(per)
            };
            OutputHandler { output: o, temps }
        })
        .collect();

    Ok(ActorModelIr {
        states: order.iter().map(|&q| m.state_name(q).to_string()).collect(),
        inputs,
        outputs,
        props,
        initial_props: set_of(a.labels(m.initial())),
        temps,
        handlers,
        output_handlers,
        timeout: None,
        queue_capacity: QUEUE_CAPACITY,
    })
}

/// Lets every input handler nondeterministically time out: the system
/// returns to the initial state with the initial propositions and calls the
/// environment's `timeout` handler, which sets TIMEOUT.
pub fn apply_timeout_mutation(
    ir: &ActorModelIr,
    cfg: &MutationConfig,
) -> Result<ActorModelIr, ActorGenError> {
    if !cfg.timeout_enabled {
        return Ok(ir.clone());
    }
    let p = cfg.timeout_probability;
    if !(p > 0.0 && p < 1.0) {
        return Err(ActorGenError::InvalidProbability(p));
    }
    if ir.timeout.is_some() {
        return Ok(ir.clone());
    }
    let clash = |v: &Named| v.name == TIMEOUT_PROP || v.ident == "timeout";
    if ir.props.iter().chain(&ir.temps).any(clash)
        || ir.inputs.iter().chain(&ir.outputs).any(|m| m.ident == "timeout")
    {
        return Err(ActorGenError::TimeoutCollision);
    }
    let mut out = ir.clone();
    out.temps.push(Named { name: TIMEOUT_PROP.into(), ident: "timeout".into() });
    out.timeout = Some(TimeoutMutation { temp: out.temps.len() - 1, probability: p });
    Ok(out)
}
