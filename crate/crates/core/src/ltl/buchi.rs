use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::ast::{to_nnf, Formula};

/// A conjunction of literals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guard {
    pub pos: BTreeSet<String>,
    pub neg: BTreeSet<String>,
}

impl Guard {
    pub fn holds(&self, labels: &BTreeSet<String>) -> bool {
        self.pos.iter().all(|p| labels.contains(p)) && !self.neg.iter().any(|p| labels.contains(p))
    }
}

/// A Büchi automaton with guarded edges and a single acceptance set. A run
/// reads one letter per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Buchi {
    pub initial: usize,
    pub edges: Vec<Vec<(Guard, usize)>>,
    pub accepting: Vec<bool>,
}

impl Buchi {
    pub fn num_states(&self) -> usize {
        self.edges.len()
    }
}

#[derive(Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Formula>,
    old: BTreeSet<Formula>,
    next: BTreeSet<Formula>,
}

const INIT: usize = 0;

fn contradicts(old: &BTreeSet<Formula>, f: &Formula) -> bool {
    match f {
        Formula::False => true,
        Formula::Prop(_) => old.contains(&Formula::Not(Box::new(f.clone()))),
        Formula::Not(p) => old.contains(p),
        _ => false,
    }
}

/// Tableau expansion: returns `(old, next, incoming)` of every node.
fn expand(f: Formula) -> Vec<Node> {
    let mut done: Vec<Node> = Vec::new();
    let mut stack = vec![Node {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([f]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    while let Some(mut node) = stack.pop() {
        let Some(eta) = node.new.pop_first() else {
            if let Some(k) = done.iter().position(|d| d.old == node.old && d.next == node.next) {
                done[k].incoming.extend(node.incoming);
                continue;
            }
            let id = done.len() + 1;
            let next = node.next.clone();
            done.push(node);
            stack.push(Node {
                incoming: BTreeSet::from([id]),
                new: next,
                old: BTreeSet::new(),
                next: BTreeSet::new(),
            });
            continue;
        };
        if node.old.contains(&eta) {
            stack.push(node);
            continue;
        }
        match &eta {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::Not(_) => {
                if contradicts(&node.old, &eta) {
                    continue;
                }
                node.old.insert(eta);
                stack.push(node);
            }
            Formula::And(a, b) => {
                for x in [a, b] {
                    if !node.old.contains(x) {
                        node.new.insert((**x).clone());
                    }
                }
                node.old.insert(eta);
                stack.push(node);
            }
            Formula::Next(a) => {
                node.next.insert((**a).clone());
                node.old.insert(eta);
                stack.push(node);
            }
            Formula::Or(a, b) | Formula::Until(a, b) | Formula::Release(a, b) => {
                let (mut n1, mut n2) = (node.clone(), node);
                let add = |n: &mut Node, x: &Formula| {
                    if !n.old.contains(x) {
                        n.new.insert(x.clone());
                    }
                };
                match &eta {
                    Formula::Or(..) => {
                        add(&mut n1, a);
                        add(&mut n2, b);
                    }
                    Formula::Until(..) => {
                        add(&mut n1, a);
                        n1.next.insert(eta.clone());
                        add(&mut n2, b);
                    }
                    _ => {
                        add(&mut n1, b);
                        n1.next.insert(eta.clone());
                        add(&mut n2, a);
                        add(&mut n2, b);
                    }
                }
                n1.old.insert(eta.clone());
                n2.old.insert(eta);
                stack.push(n2);
                stack.push(n1);
            }
            Formula::Implies(..) | Formula::Globally(_) | Formula::Finally(_) => {
                unreachable!("input is in negation normal form")
            }
        }
    }
    done
}

fn untils(f: &Formula, out: &mut BTreeSet<Formula>) {
    match f {
        Formula::Until(a, b) => {
            out.insert(f.clone());
            untils(a, out);
            untils(b, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Release(a, b) | Formula::Implies(a, b) => {
            untils(a, out);
            untils(b, out);
        }
        Formula::Not(a) | Formula::Next(a) | Formula::Globally(a) | Formula::Finally(a) => untils(a, out),
        _ => {}
    }
}

fn guard_of(old: &BTreeSet<Formula>) -> Guard {
    let mut g = Guard::default();
    for f in old {
        match f {
            Formula::Prop(p) => {
                g.pos.insert(p.clone());
            }
            Formula::Not(p) => {
                if let Formula::Prop(p) = &**p {
                    g.neg.insert(p.clone());
                }
            }
            _ => {}
        }
    }
    g
}

/// Translates `f` (normalized first) into a Büchi automaton accepting
/// exactly the words that satisfy `f`. Tableau expansion gives a
/// generalized automaton; bisimilar states are merged, then a counter
/// degeneralizes it.
pub fn ltl_to_buchi(f: &Formula) -> Buchi {
    let f = to_nnf(f);
    let nodes = expand(f.clone());
    let mut us = BTreeSet::new();
    untils(&f, &mut us);
    let us: Vec<Formula> = us.into_iter().collect();

    // generalized automaton over states 0 (init) and 1..=nodes.len()
    let n = nodes.len() + 1;
    let mut edges: Vec<Vec<(Guard, usize)>> = vec![Vec::new(); n];
    for (k, node) in nodes.iter().enumerate() {
        let g = guard_of(&node.old);
        for &src in &node.incoming {
            edges[src].push((g.clone(), k + 1));
        }
    }
    let accept: Vec<Vec<bool>> = std::iter::once(vec![true; us.len()])
        .chain(nodes.iter().map(|node| {
            us.iter()
                .map(|u| {
                    let Formula::Until(_, b) = u else { unreachable!() };
                    !node.old.contains(u) || node.old.contains(&**b)
                })
                .collect()
        }))
        .collect();

    let (block, initial, nblocks) = quotient(&edges, &accept);
    let mut qedges: Vec<BTreeSet<(Guard, usize)>> = vec![BTreeSet::new(); nblocks];
    let mut qaccept = vec![Vec::new(); nblocks];
    for s in 0..n {
        if s == INIT && block[s] != initial {
            continue;
        }
        for (g, t) in &edges[s] {
            qedges[block[s]].insert((g.clone(), block[*t]));
        }
        if s != INIT {
            qaccept[block[s]] = accept[s].clone();
        }
    }
    if qaccept[initial].is_empty() {
        qaccept[initial] = vec![false; us.len()];
    }
    degeneralize(&qedges, &qaccept, initial, us.len())
}

/// Coarsest partition respecting acceptance and guarded successors. The
/// initial pseudo-state joins a block only if its successors match.
fn quotient(edges: &[Vec<(Guard, usize)>], accept: &[Vec<bool>]) -> (Vec<usize>, usize, usize) {
    let n = edges.len();
    let mut block = vec![0usize; n];
    let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
    for s in 1..n {
        let k = ids.len();
        block[s] = *ids.entry(accept[s].clone()).or_insert(k);
    }
    let mut count = ids.len();
    let sig = |s: usize, block: &[usize]| -> BTreeSet<(Guard, usize)> {
        edges[s].iter().map(|(g, t)| (g.clone(), block[*t])).collect()
    };
    loop {
        let mut ids: HashMap<(usize, BTreeSet<(Guard, usize)>), usize> = HashMap::new();
        let mut next = vec![0usize; n];
        for s in 1..n {
            let k = ids.len();
            next[s] = *ids.entry((block[s], sig(s, &block))).or_insert(k);
        }
        let stable = ids.len() == count;
        block = next;
        count = ids.len();
        if stable {
            break;
        }
    }
    let init_sig = sig(INIT, &block);
    match (1..n).find(|&s| sig(s, &block) == init_sig) {
        Some(s) => {
            let b = block[s];
            block[INIT] = b;
            (block, b, count)
        }
        None => {
            block[INIT] = count;
            (block, count, count + 1)
        }
    }
}

fn degeneralize(edges: &[BTreeSet<(Guard, usize)>], accept: &[Vec<bool>], initial: usize, k: usize) -> Buchi {
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut states = vec![(initial, 0)];
    index.insert((initial, 0), 0);
    let mut out: Vec<Vec<(Guard, usize)>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        let (s, c) = states[id];
        let c2 = if k > 0 && accept[s][c] { (c + 1) % k } else { c };
        for (g, t) in &edges[s] {
            let key = (*t, c2);
            let tid = *index.entry(key).or_insert_with(|| {
                states.push(key);
                out.push(Vec::new());
                queue.push_back(states.len() - 1);
                states.len() - 1
            });
            out[id].push((g.clone(), tid));
        }
    }
    let accepting = states.iter().map(|&(s, c)| k == 0 || (c == 0 && accept[s][0])).collect();
    Buchi { initial: 0, edges: out, accepting }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn globally_p_is_one_state() {
        let b = ltl_to_buchi(&parse_ltl("G p").unwrap());
        assert_eq!(b.num_states(), 1);
        assert!(b.accepting[0]);
        assert_eq!(b.edges[0], vec![(Guard { pos: set(&["p"]), neg: set(&[]) }, 0)]);
    }

    #[test]
    fn finally_p_is_two_states() {
        let b = ltl_to_buchi(&parse_ltl("F p").unwrap());
        assert_eq!(b.num_states(), 2);
        assert!(!b.accepting[b.initial]);
        assert_eq!(b.accepting.iter().filter(|a| **a).count(), 1);
    }

    #[test]
    fn false_has_no_runs() {
        let b = ltl_to_buchi(&parse_ltl("false").unwrap());
        assert!(b.edges.iter().all(Vec::is_empty));
        let b = ltl_to_buchi(&parse_ltl("p && !p").unwrap());
        assert!(b.edges.iter().all(Vec::is_empty));
    }
}
