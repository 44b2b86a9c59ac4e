use std::collections::{HashMap, VecDeque};

use super::ast::{not, Formula};
use super::buchi::{ltl_to_buchi, Buchi};
use super::oracle::eval_lasso;
use super::{Kripke, LtlError};

/// An infinite path `stem · cycle^ω` over Kripke state indices. The stem
/// starts at the initial state (or is empty, in which case the cycle does);
/// its last state has an edge into `cycle[0]`, and the cycle's last state
/// has an edge back to `cycle[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.stem.iter().chain(&self.cycle).copied()
    }

    pub fn names(&self, k: &Kripke) -> (Vec<String>, Vec<String>) {
        let f = |v: &[usize]| v.iter().map(|&s| k.names[s].clone()).collect();
        (f(&self.stem), f(&self.cycle))
    }

    /// The same infinite path with the shortest loop and stem: the loop is
    /// cut to its primitive root and rotated back over the stem.
    pub fn normalized(mut self) -> Lasso {
        let n = self.cycle.len();
        if let Some(p) = (1..=n).find(|&p| n % p == 0 && (p..n).all(|i| self.cycle[i] == self.cycle[i - p])) {
            self.cycle.truncate(p);
        }
        while self.stem.last().is_some() && self.stem.last() == self.cycle.last() {
            let s = self.stem.pop().unwrap();
            self.cycle.pop();
            self.cycle.insert(0, s);
        }
        self
    }

    /// Whether the lasso is a path of `k` from its initial state.
    pub fn is_path_of(&self, k: &Kripke) -> bool {
        let seq: Vec<usize> = self.states().collect();
        !self.cycle.is_empty()
            && seq[0] == k.initial
            && seq.windows(2).all(|w| k.has_edge(w[0], w[1]))
            && k.has_edge(*self.cycle.last().unwrap(), self.cycle[0])
    }

    /// Whether `f` holds on the label word of the lasso.
    pub fn satisfies(&self, k: &Kripke, f: &Formula) -> bool {
        let labels = |v: &[usize]| v.iter().map(|&s| k.labels[s].clone()).collect::<Vec<_>>();
        eval_lasso(f, &labels(&self.stem), &labels(&self.cycle))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated(Lasso),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn lasso(&self) -> Option<&Lasso> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(l) => Some(l),
        }
    }
}

pub const DEFAULT_PRODUCT_LIMIT: usize = 5_000_000;

/// Product of `k` with an automaton: the automaton reads the label of the
/// current Kripke state while both move.
struct Product<'a> {
    k: &'a Kripke,
    b: &'a Buchi,
    index: HashMap<(usize, usize), usize>,
    states: Vec<(usize, usize)>,
    succ: Vec<Option<Vec<usize>>>,
    limit: usize,
}

impl<'a> Product<'a> {
    fn new(k: &'a Kripke, b: &'a Buchi, limit: usize) -> Self {
        let mut p = Product { k, b, index: HashMap::new(), states: Vec::new(), succ: Vec::new(), limit };
        p.id((k.initial, b.initial)).expect("limit allows one state");
        p
    }

    fn id(&mut self, s: (usize, usize)) -> Result<usize, LtlError> {
        if let Some(&i) = self.index.get(&s) {
            return Ok(i);
        }
        if self.states.len() >= self.limit {
            return Err(LtlError::TooLarge(self.limit));
        }
        self.states.push(s);
        self.succ.push(None);
        self.index.insert(s, self.states.len() - 1);
        Ok(self.states.len() - 1)
    }

    fn successors(&mut self, i: usize) -> Result<Vec<usize>, LtlError> {
        if let Some(s) = &self.succ[i] {
            return Ok(s.clone());
        }
        let (ks, bs) = self.states[i];
        let label = &self.k.labels[ks];
        let mut out = Vec::new();
        let targets: Vec<(usize, usize)> = self.b.edges[bs]
            .iter()
            .filter(|(g, _)| g.holds(label))
            .flat_map(|(_, bt)| self.k.successors(ks).map(move |kt| (kt, *bt)))
            .collect();
        for t in targets {
            let id = self.id(t)?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
        self.succ[i] = Some(out.clone());
        Ok(out)
    }

    fn accepting(&self, i: usize) -> bool {
        self.b.accepting[self.states[i].1]
    }
}

/// Nested depth-first search; true iff an accepting cycle is reachable.
fn ndfs(p: &mut Product) -> Result<bool, LtlError> {
    let mut blue: Vec<bool> = Vec::new();
    let mut red: Vec<bool> = Vec::new();
    let grow = |v: &mut Vec<bool>, n: usize| {
        if v.len() < n {
            v.resize(n, false);
        }
    };
    // (state, successors, next index)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    grow(&mut blue, 1);
    blue[0] = true;
    let s0 = p.successors(0)?;
    stack.push((0, s0, 0));
    while let Some(top) = stack.last_mut() {
        if top.2 < top.1.len() {
            let t = top.1[top.2];
            top.2 += 1;
            grow(&mut blue, p.states.len());
            if !blue[t] {
                blue[t] = true;
                let st = p.successors(t)?;
                stack.push((t, st, 0));
            }
            continue;
        }
        let (s, _, _) = stack.pop().unwrap();
        if p.accepting(s) {
            // inner search for a path back to the seed
            grow(&mut red, p.states.len());
            let mut inner = vec![s];
            while let Some(u) = inner.pop() {
                for t in p.successors(u)? {
                    if t == s {
                        return Ok(true);
                    }
                    grow(&mut red, p.states.len());
                    if !red[t] {
                        red[t] = true;
                        inner.push(t);
                    }
                }
            }
        }
    }
    Ok(false)
}

fn bfs_path(p: &mut Product, from: usize, goal: &dyn Fn(usize) -> bool) -> Result<Option<Vec<usize>>, LtlError> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = std::collections::HashSet::from([from]);
    while let Some(u) = queue.pop_front() {
        for t in p.successors(u)? {
            if goal(t) {
                let mut path = vec![t, u];
                let mut x = u;
                while x != from {
                    x = parent[&x];
                    path.push(x);
                }
                path.reverse();
                return Ok(Some(path));
            }
            if seen.insert(t) {
                parent.insert(t, u);
                queue.push_back(t);
            }
        }
    }
    Ok(None)
}

/// Accepting product states on a cycle examined when minimizing a lasso.
const LASSO_CANDIDATES: usize = 256;

/// A shortest lasso through an accepting product state, measured after
/// projection and normalization; ties go to the shorter stem.
fn shortest_lasso(p: &mut Product) -> Result<Option<Lasso>, LtlError> {
    // BFS tree from the initial state; explores everything reachable
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut order = vec![0usize];
    let mut queue = VecDeque::from([0usize]);
    let mut seen = vec![true];
    while let Some(u) = queue.pop_front() {
        for t in p.successors(u)? {
            if t >= seen.len() {
                seen.resize(t + 1, false);
                parent.resize(t + 1, None);
            }
            if !seen[t] {
                seen[t] = true;
                parent[t] = Some(u);
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    let mut best: Option<Lasso> = None;
    let mut tried = 0;
    for &a in &order {
        if !p.accepting(a) || tried >= LASSO_CANDIDATES {
            continue;
        }
        let Some(cycle) = bfs_path(p, a, &|t| t == a)? else {
            continue;
        };
        tried += 1;
        let mut stem = Vec::new();
        let mut x = a;
        while let Some(u) = parent[x] {
            stem.push(u);
            x = u;
        }
        stem.reverse();
        // cycle is a .. a
        let cycle = &cycle[..cycle.len() - 1];
        let proj = |v: &[usize]| v.iter().map(|&i| p.states[i].0).collect::<Vec<_>>();
        let lasso = Lasso { stem: proj(&stem), cycle: proj(cycle) }.normalized();
        let key = |l: &Lasso| (l.stem.len() + l.cycle.len(), l.stem.len());
        if best.as_ref().is_none_or(|b| key(&lasso) < key(b)) {
            best = Some(lasso);
        }
    }
    Ok(best)
}

/// [`check_with_limit`] with the default product ceiling.
pub fn check(k: &Kripke, f: &Formula) -> Result<Verdict, LtlError> {
    check_with_limit(k, f, DEFAULT_PRODUCT_LIMIT)
}

/// Decides whether every path of `k` from its initial state satisfies `f`.
/// A violation comes with a shortest lasso whose label word is checked
/// against `f` directly before being returned.
pub fn check_with_limit(k: &Kripke, f: &Formula, limit: usize) -> Result<Verdict, LtlError> {
    let neg = ltl_to_buchi(&not(f.clone()));
    let mut p = Product::new(k, &neg, limit);
    if !ndfs(&mut p)? {
        return Ok(Verdict::Holds);
    }
    let lasso = shortest_lasso(&mut p)?.ok_or(LtlError::SelfCheck)?;
    if !lasso.is_path_of(k) || lasso.satisfies(k, f) {
        return Err(LtlError::SelfCheck);
    }
    Ok(Verdict::Violated(lasso))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;
    use std::collections::BTreeSet;

    fn l(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn chain() -> Kripke {
        // a -> b -> c -> c, p only on c
        let mut k = Kripke::default();
        k.add_state("a", l(&[]));
        k.add_state("b", l(&[]));
        k.add_state("c", l(&["p"]));
        k.add_edge(0, 1, "x", "y");
        k.add_edge(1, 2, "x", "y");
        k.add_edge(2, 2, "x", "y");
        k
    }

    #[test]
    fn simple_verdicts() {
        let k = chain();
        let f = |s: &str| parse_ltl(s).unwrap();
        assert!(check(&k, &f("F p")).unwrap().holds());
        assert!(check(&k, &f("F G p")).unwrap().holds());
        assert!(check(&k, &f("true")).unwrap().holds());
        let v = check(&k, &f("G !p")).unwrap();
        assert_eq!(v, Verdict::Violated(Lasso { stem: vec![0, 1], cycle: vec![2] }));
        let v = check(&k, &f("X p")).unwrap();
        assert!(!v.holds());
    }

    #[test]
    fn branching_structure() {
        let mut k = chain();
        k.add_edge(0, 0, "z", "w");
        let f = parse_ltl("F p").unwrap();
        assert_eq!(check(&k, &f).unwrap(), Verdict::Violated(Lasso { stem: vec![], cycle: vec![0] }));
    }

    #[test]
    fn product_limit() {
        let k = chain();
        assert_eq!(check_with_limit(&k, &parse_ltl("G !p").unwrap(), 2), Err(LtlError::TooLarge(2)));
    }
}
