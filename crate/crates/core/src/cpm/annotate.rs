use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{AnnotatedMachine, Cpm, Section, TauState};
use crate::automata::MealyMachine;

/// Diagnostics collected while annotating.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationReport {
    /// Conditions that matched no transition, as `(section, row index)`.
    pub unused_conditions: Vec<(Section, usize)>,
    /// `(state, proposition)` pairs where some incoming transitions grant or
    /// carry the proposition and others do not.
    pub disagreements: Vec<(String, String)>,
    /// Number of fixpoint sweeps until stable.
    pub iterations: usize,
}

/// Labels every state with the propositions it holds under `cpm`.
pub fn annotate(m: &MealyMachine, cpm: &Cpm) -> AnnotatedMachine {
    annotate_with_report(m, cpm).0
}

/// Annotation plus diagnostics.
///
/// A transition's target gains every proposition of every gain condition
/// matching its `input / output`. A transition carries proposition `p` from
/// source to target unless a lose condition naming `p` matches it. Carrying
/// is iterated to a fixpoint; the initial state starts empty.
pub fn annotate_with_report(m: &MealyMachine, cpm: &Cpm) -> (AnnotatedMachine, AnnotationReport) {
    let n = m.num_states();
    let mut labels: Vec<BTreeSet<String>> = vec![BTreeSet::new(); n];
    let mut fired: HashSet<(Section, usize)> = HashSet::new();

    // per transition: seeded props and blocked props
    let mut seeds: Vec<BTreeSet<String>> = Vec::new();
    let mut blocked: Vec<BTreeSet<String>> = Vec::new();
    let transitions: Vec<(usize, usize, usize, usize)> = m.transitions().collect();
    for &(_, i, _, o) in &transitions {
        let (input, output) = (m.input_name(i), m.output_name(o));
        let mut s = BTreeSet::new();
        for (k, c) in cpm.gains.iter().enumerate() {
            if c.fires(input, output) {
                fired.insert((Section::Gains, k));
                s.extend(c.props.iter().cloned());
            }
        }
        let mut b = BTreeSet::new();
        for (k, c) in cpm.loses.iter().enumerate() {
            if c.fires(input, output) {
                fired.insert((Section::Loses, k));
                b.extend(c.props.iter().cloned());
            }
        }
        for (k, c) in cpm.taus.iter().enumerate() {
            if c.fires(input, output) {
                fired.insert((Section::Taus, k));
            }
        }
        seeds.push(s);
        blocked.push(b);
    }

    for (t, &(_, _, next, _)) in transitions.iter().enumerate() {
        labels[next].extend(seeds[t].iter().cloned());
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for (t, &(q, _, next, _)) in transitions.iter().enumerate() {
            if q == next {
                continue;
            }
            let carried: Vec<String> = labels[q]
                .iter()
                .filter(|p| !blocked[t].contains(*p) && !labels[next].contains(*p))
                .cloned()
                .collect();
            if !carried.is_empty() {
                changed = true;
                labels[next].extend(carried);
            }
        }
        if !changed {
            break;
        }
    }

    let mut unused = Vec::new();
    for s in [Section::Gains, Section::Loses, Section::Taus] {
        for k in 0..cpm.section(s).len() {
            if !fired.contains(&(s, k)) {
                unused.push((s, k));
            }
        }
    }

    let mut votes: BTreeMap<(usize, String), (bool, bool)> = BTreeMap::new();
    for (t, &(q, _, next, _)) in transitions.iter().enumerate() {
        for p in &labels[next] {
            let grants = seeds[t].contains(p) || (labels[q].contains(p) && !blocked[t].contains(p));
            let v = votes.entry((next, p.clone())).or_default();
            if grants {
                v.0 = true;
            } else {
                v.1 = true;
            }
        }
    }
    let disagreements = votes
        .into_iter()
        .filter(|(_, (yes, no))| *yes && *no)
        .map(|((q, p), _)| (m.state_name(q).to_string(), p))
        .collect();

    let report = AnnotationReport { unused_conditions: unused, disagreements, iterations };
    (AnnotatedMachine::new(m.clone(), labels), report)
}

/// Splits every transition matching a temporary-proposition condition
/// through a fresh τ-state that inherits the source's labels and carries the
/// union of the matching conditions' propositions.
pub fn expand_tau(a: &AnnotatedMachine, cpm: &Cpm) -> AnnotatedMachine {
    let base = a.without_taus();
    let m = base.machine();
    let mut used: HashSet<String> = m.states().iter().cloned().collect();
    let mut taus = Vec::new();
    for (q, i, next, o) in m.transitions() {
        let temps = cpm.temps_for(m.input_name(i), m.output_name(o));
        if temps.is_empty() {
            continue;
        }
        let mut name = format!("tau_{}_{}", m.state_name(q), m.input_name(i));
        while used.contains(&name) {
            name.push('\'');
        }
        used.insert(name.clone());
        taus.push(TauState {
            name,
            source: q,
            input: i,
            target: next,
            output: o,
            labels: base.labels(q).clone(),
            temps,
        });
    }
    base.with_taus(taus)
}
