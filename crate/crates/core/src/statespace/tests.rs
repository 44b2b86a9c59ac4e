use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::actorgen::{apply_timeout_mutation, MutationConfig, TIMEOUT_PROP};
use crate::automata::MealyMachine;
use crate::cpm::{annotate, parse_cpm, Condition};
use crate::ltl::kripke_from_annotated;

fn example() -> (AnnotatedMachine, Cpm) {
    let m = MealyMachine::builder()
        .initial("q1")
        .transition("q1", "sigma1", "omega1", "q2")
        .transition("q2", "sigma1", "omega2", "q1")
        .build()
        .unwrap();
    let cpm = parse_cpm("[GAINS]\np | sigma1 | omega1\n[LOSES]\np | sigma1 | omega2\n[TAUS]\nomega2set | * | omega2\n")
        .unwrap();
    (annotate(&m, &cpm), cpm)
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn example_ir() -> ActorModelIr {
    let (a, cpm) = example();
    build_ir(&expand_tau(&a, &cpm), &cpm).unwrap()
}

#[test]
fn example_state_space_is_small() {
    let ir = example_ir();
    let lts = explore(&ir).unwrap();
    assert!(lts.nodes.len() <= node_bound(&ir));
    assert!(lts.nodes.len() <= 12, "{} nodes", lts.nodes.len());
    let c = collapse(&lts).unwrap();
    assert_eq!(c.states, vec!["q1".to_string(), "q2".to_string()]);
    assert_eq!(c.labels, vec![set(&[]), set(&["p"])]);
    assert!(c.is_deterministic());
    let back = c.transitions_from(1, "sigma1").next().unwrap();
    assert_eq!(back.output, "omega2");
    assert_eq!(back.temps, set(&["omega2set"]));
}

#[test]
fn example_round_trip_passes() {
    let (a, cpm) = example();
    let r = verify_roundtrip(&a, &cpm).unwrap();
    assert!(r.passed(), "{:?}", r.verdict);
    assert_eq!(r.macro_states, 2);
}

#[test]
fn empty_cpm_round_trip_passes() {
    let (a, _) = example();
    let r = verify_roundtrip(&a.without_taus(), &Cpm::default()).unwrap();
    assert!(r.passed());
}

#[test]
fn corrupted_branch_is_caught() {
    let (a, cpm) = example();
    let expected = expand_tau(&a, &cpm);
    let mut ir = build_ir(&expected, &cpm).unwrap();
    // q2 now answers omega1 instead of omega2
    ir.handlers[0].branches[1].output = ir.handlers[0].branches[0].output;
    let r = verify_ir_roundtrip(&ir, &expected).unwrap();
    assert!(matches!(r.verdict, RoundTrip::Inequivalent { ref witness } if !witness.is_empty()), "{:?}", r.verdict);

    let mut ir = build_ir(&expected, &cpm).unwrap();
    ir.handlers[0].branches[0].effects.clear();
    let r = verify_ir_roundtrip(&ir, &expected).unwrap();
    assert!(matches!(r.verdict, RoundTrip::LabelMismatch { .. }), "{:?}", r.verdict);

    let mut ir = build_ir(&expected, &cpm).unwrap();
    ir.output_handlers.clear();
    let r = verify_ir_roundtrip(&ir, &expected).unwrap();
    assert!(matches!(r.verdict, RoundTrip::TempMismatch { .. }), "{:?}", r.verdict);
}

#[test]
fn ceiling_is_enforced() {
    assert_eq!(explore_with(&example_ir(), 3), Err(StatespaceError::TooLarge(3)));
}

#[test]
fn exploration_is_deterministic() {
    let ir = example_ir();
    assert_eq!(explore(&ir).unwrap(), explore(&ir).unwrap());
    assert_eq!(emit_lts_dot(&explore(&ir).unwrap()), emit_lts_dot(&explore(&ir).unwrap()));
}

#[test]
fn lts_dot_round_trip() {
    for ir in [example_ir(), apply_timeout_mutation(&example_ir(), &mutation()).unwrap()] {
        let lts = explore(&ir).unwrap();
        let back = parse_lts_dot(&emit_lts_dot(&lts)).unwrap();
        assert_eq!(back, lts);
    }
    assert!(matches!(parse_lts_dot("digraph g { __start -> n0; n0 [label=\"junk\"]; }"), Err(StatespaceError::Dot(_))));
}

fn mutation() -> MutationConfig {
    MutationConfig { timeout_enabled: true, timeout_probability: 0.1 }
}

#[test]
fn timeout_mutation_resets_to_initial() {
    let ir = apply_timeout_mutation(&example_ir(), &mutation()).unwrap();
    let lts = explore(&ir).unwrap();
    assert!(lts.nodes.len() <= node_bound(&ir));
    let c = collapse(&lts).unwrap();
    assert!(!c.is_deterministic());
    let timeouts: Vec<_> = c.transitions.iter().filter(|t| t.output == TIMEOUT).collect();
    assert!(!timeouts.is_empty());
    for t in &timeouts {
        assert_eq!(t.to, c.initial);
        assert_eq!(t.temps, set(&[TIMEOUT_PROP]));
    }
    let k = c.to_kripke();
    for s in k.reachable() {
        if k.internal[s] {
            continue;
        }
        assert!(
            k.successors(s).any(|t| k.labels[t].contains(TIMEOUT_PROP)),
            "{} has no timeout successor",
            k.names[s]
        );
    }
}

#[test]
fn lts_and_model_kripke_agree() {
    let (a, cpm) = example();
    let expanded = expand_tau(&a, &cpm);
    let from_lts = kripke_from_lts(&explore(&build_ir(&expanded, &cpm).unwrap()).unwrap()).unwrap();
    let direct = kripke_from_annotated(&expanded);
    assert_eq!(from_lts.num_states(), direct.num_states());
    let mut l1: Vec<_> = from_lts.labels.clone();
    let mut l2: Vec<_> = direct.labels.clone();
    l1.sort();
    l2.sort();
    assert_eq!(l1, l2);
}

/// A random machine with a random CPM over a handful of propositions.
fn arb_case() -> impl Strategy<Value = (MealyMachine, Cpm)> {
    (1usize..=8, 1usize..=5).prop_flat_map(|(n, k)| {
        let table = proptest::collection::vec((0..n, 0usize..3), n * k);
        let cond = (0usize..3, 0..k, 0usize..3);
        let gains = proptest::collection::vec(cond.clone(), 0..4);
        let loses = proptest::collection::vec(cond.clone(), 0..4);
        let taus = proptest::collection::vec(cond, 0..3);
        (Just(n), Just(k), table, gains, loses, taus).prop_map(|(n, k, table, gains, loses, taus)| {
            let mut b = MealyMachine::builder().initial("s0");
            for q in 0..n {
                b = b.state(&format!("s{q}"));
            }
            for (t, &(next, o)) in table.iter().enumerate() {
                let (q, i) = (t / k, t % k);
                b = b.transition(&format!("s{q}"), &format!("i{i}"), &format!("o{o}"), &format!("s{next}"));
            }
            let cond = |prefix: &str, (p, i, o): (usize, usize, usize)| {
                Condition::new([format!("{prefix}{p}")], [format!("i{i}")], [format!("o{o}")])
            };
            let cpm = Cpm {
                gains: gains.into_iter().map(|c| cond("P", c)).collect(),
                loses: loses.into_iter().map(|c| cond("P", c)).collect(),
                taus: taus.into_iter().map(|c| cond("T", c)).collect(),
            };
            (b.build().unwrap(), cpm)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_round_trips_pass((m, cpm) in arb_case()) {
        let a = annotate(&m, &cpm);
        let r = verify_roundtrip(&a, &cpm).unwrap();
        prop_assert!(r.passed(), "{:?}", r.verdict);
        let ir = build_ir(&expand_tau(&a, &cpm), &cpm).unwrap();
        prop_assert!(r.lts_nodes <= node_bound(&ir));
    }

    /// Replaying a word through the explored LTS tracks the same state,
    /// propositions and output as running the annotated machine.
    #[test]
    fn lts_simulates_machine((m, cpm) in arb_case(), word in proptest::collection::vec(0usize..5, 0..12)) {
        let a = annotate(&m, &cpm);
        let ir = build_ir(&expand_tau(&a, &cpm), &cpm).unwrap();
        let lts = explore(&ir).unwrap();
        let mut node = lts.initial;
        let mut q = m.initial();
        for i in word.into_iter().filter(|&i| i < m.inputs().len()) {
            let input = m.input_name(i);
            let (next, o) = m.step(q, i);
            let req = lts.successors(node).find(|e| lts.nodes[e.to].pending == Pending::Input(input.to_string()));
            let after_in = lts.successors(req.unwrap().to).next().unwrap();
            prop_assert_eq!(&after_in.label, input);
            let after_out = lts.successors(after_in.to).next().unwrap();
            prop_assert_eq!(&after_out.label, m.output_name(o));
            node = after_out.to;
            q = next;
            prop_assert_eq!(&lts.nodes[node].state, m.state_name(q));
            prop_assert_eq!(&lts.nodes[node].props, a.labels(q));
            prop_assert_eq!(&lts.nodes[node].temps, &cpm.temps_for(input, m.output_name(o)));
        }
    }
}
