use std::collections::BTreeSet;

use super::ast::Formula;
use super::{Kripke, Lasso, LtlError};

/// Truth of `f` at position 0 of the word `stem · loop^ω`, by fixpoint
/// evaluation of every subformula over the `stem.len() + loop.len()`
/// distinct positions.
pub fn eval_lasso(f: &Formula, stem: &[BTreeSet<String>], cycle: &[BTreeSet<String>]) -> bool {
    assert!(!cycle.is_empty(), "a lasso needs a non-empty loop");
    let word: Vec<&BTreeSet<String>> = stem.iter().chain(cycle).collect();
    let n = word.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { stem.len() };
    values(f, &word, &succ)[0]
}

fn values(f: &Formula, word: &[&BTreeSet<String>], succ: &impl Fn(usize) -> usize) -> Vec<bool> {
    let n = word.len();
    // least (`init` false) or greatest (`init` true) fixpoint of
    // v[i] = step(i, v[succ i])
    let fix = |init: bool, step: &dyn Fn(usize, bool) -> bool| {
        let mut v = vec![init; n];
        for _ in 0..=n {
            let mut changed = false;
            for i in (0..n).rev() {
                let x = step(i, v[succ(i)]);
                if x != v[i] {
                    v[i] = x;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        v
    };
    match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Prop(p) => word.iter().map(|l| l.contains(p)).collect(),
        Formula::Not(a) => values(a, word, succ).into_iter().map(|x| !x).collect(),
        Formula::And(a, b) => {
            let (a, b) = (values(a, word, succ), values(b, word, succ));
            (0..n).map(|i| a[i] && b[i]).collect()
        }
        Formula::Or(a, b) => {
            let (a, b) = (values(a, word, succ), values(b, word, succ));
            (0..n).map(|i| a[i] || b[i]).collect()
        }
        Formula::Implies(a, b) => {
            let (a, b) = (values(a, word, succ), values(b, word, succ));
            (0..n).map(|i| !a[i] || b[i]).collect()
        }
        Formula::Next(a) => {
            let a = values(a, word, succ);
            (0..n).map(|i| a[succ(i)]).collect()
        }
        Formula::Globally(a) => {
            let a = values(a, word, succ);
            fix(true, &|i, later| a[i] && later)
        }
        Formula::Finally(a) => {
            let a = values(a, word, succ);
            fix(false, &|i, later| a[i] || later)
        }
        Formula::Until(a, b) => {
            let (a, b) = (values(a, word, succ), values(b, word, succ));
            fix(false, &|i, later| b[i] || (a[i] && later))
        }
        Formula::Release(a, b) => {
            let (a, b) = (values(a, word, succ), values(b, word, succ));
            fix(true, &|i, later| b[i] && (a[i] || later))
        }
    }
}

/// Result of the exhaustive lasso search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    /// No lasso within the bounds falsifies the formula.
    BoundedHolds,
    Violated(Lasso),
}

/// Upper limit on enumerated lassos before giving up.
pub const ORACLE_LIMIT: usize = 5_000_000;

/// Enumerates every lasso of `k` from the initial state with at most
/// `stem_max` stem states and `loop_max` loop states and evaluates `f` on
/// its label word.
pub fn bounded_oracle(
    k: &Kripke,
    f: &Formula,
    stem_max: usize,
    loop_max: usize,
) -> Result<OracleVerdict, LtlError> {
    let mut path = vec![k.initial];
    let mut budget = ORACLE_LIMIT;
    let found = search(k, f, stem_max, loop_max, &mut path, &mut budget)?;
    Ok(match found {
        Some(l) => OracleVerdict::Violated(l),
        None => OracleVerdict::BoundedHolds,
    })
}

fn search(
    k: &Kripke,
    f: &Formula,
    stem_max: usize,
    loop_max: usize,
    path: &mut Vec<usize>,
    budget: &mut usize,
) -> Result<Option<Lasso>, LtlError> {
    let last = *path.last().unwrap();
    let n = path.len();
    for j in n.saturating_sub(loop_max)..n.min(stem_max + 1) {
        if !k.has_edge(last, path[j]) {
            continue;
        }
        if *budget == 0 {
            return Err(LtlError::BoundExplosion(ORACLE_LIMIT));
        }
        *budget -= 1;
        let stem: Vec<_> = path[..j].iter().map(|&s| k.labels[s].clone()).collect();
        let cycle: Vec<_> = path[j..].iter().map(|&s| k.labels[s].clone()).collect();
        if !eval_lasso(f, &stem, &cycle) {
            return Ok(Some(Lasso { stem: path[..j].to_vec(), cycle: path[j..].to_vec() }));
        }
    }
    if n < stem_max + loop_max {
        let succs: BTreeSet<usize> = k.successors(last).collect();
        for t in succs {
            path.push(t);
            let r = search(k, f, stem_max, loop_max, path, budget)?;
            path.pop();
            if r.is_some() {
                return Ok(r);
            }
        }
    }
    Ok(None)
}
