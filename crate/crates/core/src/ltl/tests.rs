use std::collections::BTreeSet;

use proptest::prelude::*;

use super::ast::tests::arb_formula;
use super::*;

fn labels_of(mask: u8, props: usize) -> BTreeSet<String> {
    (0..props).filter(|k| mask & (1 << k) != 0).map(|k| format!("p{k}")).collect()
}

/// A Kripke structure whose only path is `stem · loop^ω`.
fn lasso_kripke(stem: &[u8], cycle: &[u8]) -> Kripke {
    let mut k = Kripke::default();
    for (i, &m) in stem.iter().chain(cycle).enumerate() {
        k.add_state(&format!("s{i}"), labels_of(m, 3));
    }
    let n = stem.len() + cycle.len();
    for i in 0..n {
        let to = if i + 1 < n { i + 1 } else { stem.len() };
        k.add_edge(i, to, "a", "b");
    }
    k
}

pub(crate) fn arb_kripke(max_states: usize) -> impl Strategy<Value = Kripke> {
    (1..=max_states).prop_flat_map(|n| {
        let labels = proptest::collection::vec(0u8..8, n);
        let succ = proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=2), n);
        (labels, succ).prop_map(move |(labels, succ)| {
            let mut k = Kripke::default();
            for (i, m) in labels.iter().enumerate() {
                k.add_state(&format!("s{i}"), labels_of(*m, 3));
            }
            for (i, ts) in succ.iter().enumerate() {
                for &t in ts {
                    k.add_edge(i, t, "a", "b");
                }
            }
            k
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn automaton_language_matches_direct_semantics(
        f in arb_formula(3, 4),
        stem in proptest::collection::vec(0u8..8, 0..=4),
        cycle in proptest::collection::vec(0u8..8, 1..=4),
    ) {
        let k = lasso_kripke(&stem, &cycle);
        let direct = eval_lasso(
            &f,
            &stem.iter().map(|&m| labels_of(m, 3)).collect::<Vec<_>>(),
            &cycle.iter().map(|&m| labels_of(m, 3)).collect::<Vec<_>>(),
        );
        prop_assert_eq!(check(&k, &f).unwrap().holds(), direct);
        // on a single path, a formula and its negation cannot both hold
        prop_assert_ne!(check(&k, &not(f.clone())).unwrap().holds(), direct);
    }

    #[test]
    fn check_agrees_with_bounded_oracle(k in arb_kripke(6), f in arb_formula(3, 4)) {
        let n = k.num_states();
        let verdict = check(&k, &f).unwrap();
        let oracle = bounded_oracle(&k, &f, n, 2 * n).unwrap();
        prop_assert_eq!(verdict.holds(), oracle == OracleVerdict::BoundedHolds);
        if let Verdict::Violated(l) = &verdict {
            prop_assert!(l.is_path_of(&k));
            prop_assert!(!l.satisfies(&k, &f));
        }
    }

    #[test]
    fn negated_nnf_is_equivalent(
        f in arb_formula(3, 4),
        stem in proptest::collection::vec(0u8..8, 0..=3),
        cycle in proptest::collection::vec(0u8..8, 1..=3),
    ) {
        let s: Vec<_> = stem.iter().map(|&m| labels_of(m, 3)).collect();
        let c: Vec<_> = cycle.iter().map(|&m| labels_of(m, 3)).collect();
        prop_assert_eq!(eval_lasso(&to_nnf(&f), &s, &c), eval_lasso(&f, &s, &c));
    }
}
