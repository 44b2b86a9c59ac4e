use std::collections::{HashMap, VecDeque};

use super::mealy::MealyMachine;
use super::AutomataError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A shortest input word on which the two machines' output words differ.
    Inequivalent { witness: Vec<String> },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }

    pub fn witness(&self) -> Option<&[String]> {
        match self {
            Equivalence::Equivalent => None,
            Equivalence::Inequivalent { witness } => Some(witness),
        }
    }
}

/// Checks trace equivalence of two deterministic, input-complete machines,
/// which coincides with bisimilarity for this class.
///
/// Input alphabets must agree (as sets); see [`bisimilar_on_shared_inputs`].
pub fn bisimilar(a: &MealyMachine, b: &MealyMachine) -> Result<Equivalence, AutomataError> {
    let mut sa: Vec<&String> = a.inputs().iter().collect();
    let mut sb: Vec<&String> = b.inputs().iter().collect();
    sa.sort();
    sb.sort();
    if sa != sb {
        return Err(AutomataError::AlphabetMismatch {
            only_left: a.inputs().iter().filter(|i| b.input_id(i).is_none()).cloned().collect(),
            only_right: b.inputs().iter().filter(|i| a.input_id(i).is_none()).cloned().collect(),
        });
    }
    Ok(product_search(a, b, a.inputs()))
}

/// Compares the machines on the intersection of their input alphabets.
pub fn bisimilar_on_shared_inputs(a: &MealyMachine, b: &MealyMachine) -> Equivalence {
    let shared: Vec<String> =
        a.inputs().iter().filter(|i| b.input_id(i).is_some()).cloned().collect();
    product_search(a, b, &shared)
}

fn product_search(a: &MealyMachine, b: &MealyMachine, alphabet: &[String]) -> Equivalence {
    let ids: Vec<(usize, usize)> = alphabet
        .iter()
        .map(|s| (a.input_id(s).unwrap(), b.input_id(s).unwrap()))
        .collect();
    // parent pointers for witness reconstruction
    let mut parent: HashMap<(usize, usize), Option<((usize, usize), usize)>> = HashMap::new();
    let start = (a.initial(), b.initial());
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some((p, q)) = queue.pop_front() {
        for (k, &(ia, ib)) in ids.iter().enumerate() {
            let (pn, po) = a.step(p, ia);
            let (qn, qo) = b.step(q, ib);
            if a.output_name(po) != b.output_name(qo) {
                let mut word = vec![alphabet[k].clone()];
                let mut cur = (p, q);
                while let Some(Some((prev, sym))) = parent.get(&cur) {
                    word.push(alphabet[*sym].clone());
                    cur = *prev;
                }
                word.reverse();
                return Equivalence::Inequivalent { witness: word };
            }
            let next = (pn, qn);
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some(((p, q), k)));
                queue.push_back(next);
            }
        }
    }
    Equivalence::Equivalent
}

/// Pairs of states reached together by the same input words, in BFS order.
/// Useful for comparing per-state annotations of equivalent machines.
pub fn synchronous_pairs(a: &MealyMachine, b: &MealyMachine) -> Vec<(usize, usize, Vec<String>)> {
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    let start = (a.initial(), b.initial());
    seen.insert(start, ());
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(start, Vec::<String>::new())]);
    while let Some(((p, q), word)) = queue.pop_front() {
        out.push((p, q, word.clone()));
        for (ia, sym) in a.inputs().iter().enumerate() {
            let Some(ib) = b.input_id(sym) else { continue };
            let next = (a.next_state(p, ia), b.next_state(q, ib));
            if seen.insert(next, ()).is_none() {
                let mut w = word.clone();
                w.push(sym.clone());
                queue.push_back((next, w));
            }
        }
    }
    out
}
