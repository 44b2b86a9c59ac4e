//! Counterexamples as replayable tests, and the feedback loop to the learner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{EPSILON, TAU};
use crate::cpm::{annotate, expand_tau, AnnotatedMachine, Cpm};
use crate::learning::{EquivalenceOracle, LStar, LearnError, Mapper, Sul};
use crate::ltl::{check_all, kripke_from_annotated, Kripke, Lasso, LtlError, Property, PropertyResult, ReportLine};
use crate::MealyMachine;

#[derive(Debug, Error)]
pub enum TestkitError {
    #[error("lasso step {step} ({from} -> {to}) is not a transition of the model")]
    NotReproducible { step: usize, from: String, to: String },
    #[error("feedback needs a diverged replay")]
    NotDiverged,
    #[error("test file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("report entry `{0}` has no usable lasso")]
    NoLasso(String),
    #[error("closed loop did not settle within {0} iterations")]
    NoFixpoint(usize),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub property: String,
    pub stem: Vec<String>,
    #[serde(rename = "loop")]
    pub cycle: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub property: String,
    pub inputs: Vec<String>,
    pub expected_outputs: Vec<String>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concrete_inputs: Option<Vec<String>>,
}

impl TestCase {
    /// Fills in the concrete input word.
    pub fn with_mapper(mut self, mapper: &Mapper) -> Self {
        self.concrete_inputs = Some(self.inputs.iter().map(|i| mapper.concretize_input(i).to_string()).collect());
        self
    }
}

/// Turns a lasso of `k` (built from `a` by [`kripke_from_annotated`]) into
/// the input word driving `a` along it, with the loop taken `unroll` times.
pub fn concretize(
    property: &str,
    lasso: &Lasso,
    k: &Kripke,
    a: &AnnotatedMachine,
    unroll: usize,
) -> Result<TestCase, TestkitError> {
    let m = a.machine();
    let n = m.num_states();
    let mut path: Vec<usize> = lasso.stem.clone();
    for _ in 0..unroll {
        path.extend(&lasso.cycle);
    }
    if unroll > 0 {
        path.push(lasso.cycle[0]);
    }
    let mut inputs = Vec::new();
    for (step, w) in path.windows(2).enumerate() {
        let (from, to) = (w[0], w[1]);
        let bad = || TestkitError::NotReproducible {
            step,
            from: k.names[from].clone(),
            to: k.names[to].clone(),
        };
        if from >= n {
            // leaving a τ-state costs no input
            match a.taus().get(from - n) {
                Some(t) if t.target == to => continue,
                _ => return Err(bad()),
            }
        }
        let input = k.edges[from]
            .iter()
            .filter(|e| e.to == to)
            .filter_map(|e| m.input_id(&e.input))
            .find(|&i| {
                let (next, _) = m.step(from, i);
                match to.checked_sub(n) {
                    None => next == to && a.tau_for(from, i).is_none(),
                    Some(t) => a.taus().get(t).is_some_and(|t| t.source == from && t.input == i),
                }
            })
            .ok_or_else(bad)?;
        inputs.push(m.input_name(input).to_string());
    }
    let expected_outputs = m.run(&inputs).expect("inputs come from the machine");
    let (stem, cycle) = lasso.names(k);
    Ok(TestCase {
        property: property.to_string(),
        inputs,
        expected_outputs,
        provenance: Provenance { property: property.to_string(), stem, cycle },
        concrete_inputs: None,
    })
}

/// Like [`concretize`], but from the edges recorded in a check report.
pub fn test_from_report(line: &ReportLine, unroll: usize) -> Result<TestCase, TestkitError> {
    let lasso = line.lasso.as_ref().ok_or_else(|| TestkitError::NoLasso(line.name.clone()))?;
    let split = lasso.stem.len();
    if lasso.cycle.is_empty() || lasso.edges.len() != split + lasso.cycle.len() {
        return Err(TestkitError::NoLasso(line.name.clone()));
    }
    let (stem, cycle) = lasso.edges.split_at(split);
    let mut edges: Vec<&(String, String)> = stem.iter().collect();
    for _ in 0..unroll {
        edges.extend(cycle);
    }
    // a τ hop split by the end of the word still needs its output
    if edges.last().is_some_and(|(_, o)| o == TAU) {
        edges.push(&cycle[0]);
    }
    let mut inputs = Vec::new();
    let mut expected_outputs = Vec::new();
    for (input, output) in edges {
        if input == EPSILON {
            if let Some(last) = expected_outputs.last_mut() {
                *last = output.clone();
            }
        } else if !input.is_empty() {
            inputs.push(input.clone());
            expected_outputs.push(output.clone());
        }
    }
    Ok(TestCase {
        property: line.name.clone(),
        inputs,
        expected_outputs,
        provenance: Provenance { property: line.name.clone(), stem: lasso.stem.clone(), cycle: lasso.cycle.clone() },
        concrete_inputs: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReplayVerdict {
    Confirmed,
    /// `position` is the first mismatching index of `observed`.
    Diverged { position: usize, observed: Vec<String> },
}

impl ReplayVerdict {
    pub fn confirmed(&self) -> bool {
        matches!(self, ReplayVerdict::Confirmed)
    }
}

/// Runs the whole test on a freshly reset SUL.
pub fn replay(t: &TestCase, sul: &mut dyn Sul) -> Result<ReplayVerdict, TestkitError> {
    sul.reset();
    let mut observed = Vec::with_capacity(t.inputs.len());
    for (position, input) in t.inputs.iter().enumerate() {
        let out = sul.step(input).map_err(|e| match e {
            LearnError::Sul { .. } => e,
            other => LearnError::Sul { position, message: other.to_string() },
        })?;
        observed.push(out);
    }
    match observed.iter().zip(&t.expected_outputs).position(|(o, e)| o != e) {
        None if observed.len() == t.expected_outputs.len() => Ok(ReplayVerdict::Confirmed),
        None => Ok(ReplayVerdict::Diverged { position: observed.len().min(t.expected_outputs.len()), observed }),
        Some(position) => Ok(ReplayVerdict::Diverged { position, observed }),
    }
}

/// The diverging prefix of the test, usable as a learner counterexample.
pub fn feedback(t: &TestCase, verdict: &ReplayVerdict) -> Result<Vec<String>, TestkitError> {
    match verdict {
        ReplayVerdict::Confirmed => Err(TestkitError::NotDiverged),
        ReplayVerdict::Diverged { position, .. } => Ok(t.inputs[..(*position + 1).min(t.inputs.len())].to_vec()),
    }
}

pub fn write_jsonl(tests: &[TestCase]) -> String {
    tests.iter().map(|t| serde_json::to_string(t).expect("serializable") + "\n").collect()
}

pub fn read_jsonl(text: &str) -> Result<Vec<TestCase>, TestkitError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let t: TestCase =
                serde_json::from_str(l).map_err(|e| TestkitError::Parse { line: n + 1, message: e.to_string() })?;
            if t.inputs.len() != t.expected_outputs.len() {
                return Err(TestkitError::Parse { line: n + 1, message: "inputs and outputs differ in length".into() });
            }
            Ok(t)
        })
        .collect()
}

/// Everything the checker says about one model.
pub struct ModelCheck {
    pub annotated: AnnotatedMachine,
    pub kripke: Kripke,
    pub results: Vec<PropertyResult>,
}

impl ModelCheck {
    pub fn run(m: &MealyMachine, cpm: &Cpm, props: &[Property]) -> Result<Self, TestkitError> {
        let annotated = expand_tau(&annotate(m, cpm), cpm);
        let kripke = kripke_from_annotated(&annotated);
        let results = check_all(&kripke, props)?;
        Ok(ModelCheck { annotated, kripke, results })
    }

    /// One test per violated property.
    pub fn tests(&self, unroll: usize) -> Result<Vec<TestCase>, TestkitError> {
        self.results
            .iter()
            .filter_map(|r| r.verdict.lasso().map(|l| (r, l)))
            .map(|(r, l)| concretize(&r.property.name, l, &self.kripke, &self.annotated, unroll))
            .collect()
    }
}

#[derive(Debug)]
pub enum LoopEnd {
    AllHold,
    Confirmed(TestCase),
}

#[derive(Debug)]
pub struct LoopOutcome {
    pub end: LoopEnd,
    pub model: MealyMachine,
    /// Models checked, the first one included.
    pub iterations: usize,
}

/// learn, check, concretize, replay, feed back, repeat.
pub fn closed_loop(
    lstar: &mut LStar,
    sul: &mut dyn Sul,
    oracle: &mut dyn EquivalenceOracle,
    cpm: &Cpm,
    props: &[Property],
    max_iterations: usize,
) -> Result<LoopOutcome, TestkitError> {
    let mut model = lstar.learn(sul, oracle)?.machine;
    for iterations in 1..=max_iterations {
        let mc = ModelCheck::run(&model, cpm, props)?;
        let Some(test) = mc.tests(1)?.into_iter().next() else {
            return Ok(LoopOutcome { end: LoopEnd::AllHold, model, iterations });
        };
        let verdict = replay(&test, sul)?;
        if verdict.confirmed() {
            return Ok(LoopOutcome { end: LoopEnd::Confirmed(test), model, iterations });
        }
        model = lstar.refine(sul, &feedback(&test, &verdict)?)?;
    }
    Err(TestkitError::NoFixpoint(max_iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::learning::{ExactOracle, MachineSul};
    use crate::ltl::load_properties;
    use proptest::prelude::*;

    fn w(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn uds_p4() -> TestCase {
        let props = load_properties(fixtures::GENERIC_PROPERTIES, &fixtures::uds_cpm()).unwrap();
        let mc = ModelCheck::run(&fixtures::uds().machine, &fixtures::uds_cpm(), &props).unwrap();
        let tests = mc.tests(1).unwrap();
        assert_eq!(tests.len(), 1);
        tests.into_iter().next().unwrap()
    }

    #[test]
    fn uds_wrong_key_test() {
        let t = uds_p4();
        assert_eq!(t.property, "P4");
        assert_eq!(t.inputs, w(&["Extended", "SA", "SAwKey", "SAwWrongKey"]));
        assert_eq!(t.expected_outputs.last().unwrap(), "67");
        let f = fixtures::uds();
        assert_eq!(replay(&t, &mut fixtures::uds_sul(&f)).unwrap(), ReplayVerdict::Confirmed);
        let p = fixtures::uds_patched();
        match replay(&t, &mut fixtures::uds_sul(&p)).unwrap() {
            ReplayVerdict::Diverged { position, observed } => {
                assert_eq!(position, 3);
                assert_eq!(observed[3], "7f");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn report_edges_give_the_same_test() {
        let cpm = fixtures::uds_cpm();
        let props = load_properties(fixtures::GENERIC_PROPERTIES, &cpm).unwrap();
        let mc = ModelCheck::run(&fixtures::uds().machine, &cpm, &props).unwrap();
        let r = mc.results.iter().find(|r| !r.verdict.holds()).unwrap();
        let line = ReportLine::from_result(&mc.kripke, r);
        for unroll in 1..=3 {
            let from_model = concretize("P4", r.verdict.lasso().unwrap(), &mc.kripke, &mc.annotated, unroll).unwrap();
            assert_eq!(test_from_report(&line, unroll).unwrap(), from_model);
        }
        let holds = ReportLine::from_result(&mc.kripke, &mc.results[0]);
        assert!(matches!(test_from_report(&holds, 1), Err(TestkitError::NoLasso(_))));
    }

    #[test]
    fn self_loop_lasso_and_unrolling() {
        let m = MealyMachine::builder().initial("q0").transition("q0", "a", "x", "q0").build().unwrap();
        let a = AnnotatedMachine::unlabeled(m);
        let k = kripke_from_annotated(&a);
        let lasso = Lasso { stem: vec![], cycle: vec![0] };
        assert_eq!(concretize("p", &lasso, &k, &a, 1).unwrap().inputs, w(&["a"]));
        let t = concretize("p", &lasso, &k, &a, 2).unwrap();
        assert_eq!(t.inputs, w(&["a", "a"]));
        assert_eq!(t.expected_outputs, w(&["x", "x"]));
    }

    #[test]
    fn bogus_lasso_is_rejected() {
        let m = MealyMachine::builder()
            .initial("q0")
            .transition("q0", "a", "x", "q1")
            .transition("q1", "a", "x", "q1")
            .build()
            .unwrap();
        let a = AnnotatedMachine::unlabeled(m);
        let k = kripke_from_annotated(&a);
        let lasso = Lasso { stem: vec![0], cycle: vec![1, 0] };
        assert!(matches!(concretize("p", &lasso, &k, &a, 1), Err(TestkitError::NotReproducible { step: 1, .. })));
    }

    #[test]
    fn empty_test_is_confirmed() {
        let mut sul = MachineSul::new(fixtures::example().machine);
        assert!(replay(&TestCase::default(), &mut sul).unwrap().confirmed());
    }

    #[test]
    fn unknown_input_is_reported_with_position() {
        let mut sul = MachineSul::new(fixtures::example().machine);
        let t = TestCase { inputs: w(&["sigma1", "nope"]), expected_outputs: w(&["omega1", "x"]), ..Default::default() };
        assert!(matches!(replay(&t, &mut sul), Err(TestkitError::Learn(LearnError::Sul { position: 1, .. }))));
    }

    #[test]
    fn feedback_contract() {
        let t = TestCase { inputs: w(&["a", "b", "c"]), expected_outputs: w(&["x", "y", "z"]), ..Default::default() };
        assert!(matches!(feedback(&t, &ReplayVerdict::Confirmed), Err(TestkitError::NotDiverged)));
        let d = ReplayVerdict::Diverged { position: 0, observed: w(&["q", "y", "z"]) };
        assert_eq!(feedback(&t, &d).unwrap(), w(&["a"]));
    }

    #[test]
    fn jsonl_round_trip() {
        let t = uds_p4().with_mapper(&fixtures::uds_mapper());
        let text = write_jsonl(&[t.clone(), uds_p4()]);
        assert!(text.contains("\"loop\""));
        assert_eq!(read_jsonl(&text).unwrap(), vec![t, uds_p4()]);
        assert!(matches!(read_jsonl("{\"property\":1}"), Err(TestkitError::Parse { line: 1, .. })));
    }

    #[test]
    fn closed_loop_on_uds() {
        let cpm = fixtures::uds_cpm();
        let props = load_properties(fixtures::GENERIC_PROPERTIES, &cpm).unwrap();
        let alphabet = w(fixtures::UDS_INPUTS);

        let f = fixtures::uds();
        let mut sul = fixtures::uds_sul(&f);
        let mut oracle = ExactOracle::new(f.machine.clone());
        let mut lstar = LStar::new(alphabet.clone()).unwrap();
        let out = closed_loop(&mut lstar, &mut sul, &mut oracle, &cpm, &props, 3).unwrap();
        assert!(matches!(out.end, LoopEnd::Confirmed(ref t) if t.property == "P4"));

        let p = fixtures::uds_patched();
        let mut sul = fixtures::uds_sul(&p);
        let mut oracle = ExactOracle::new(p.machine.clone());
        let mut lstar = LStar::new(alphabet).unwrap();
        let out = closed_loop(&mut lstar, &mut sul, &mut oracle, &cpm, &props, 3).unwrap();
        assert!(matches!(out.end, LoopEnd::AllHold));
    }

    fn arb_machine() -> impl Strategy<Value = MealyMachine> {
        (1usize..=5, 1usize..=3).prop_flat_map(|(n, k)| {
            proptest::collection::vec((0..n, 0usize..3), n * k).prop_map(move |cells| {
                let mut b = MealyMachine::builder().initial("s0");
                for (idx, (to, o)) in cells.into_iter().enumerate() {
                    let (q, i) = (idx / k, idx % k);
                    b = b.transition(&format!("s{q}"), &format!("i{i}"), &format!("o{o}"), &format!("s{to}"));
                }
                b.build().unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Every concretized witness replays on its own model.
        #[test]
        fn witnesses_replay_on_their_model(m in arb_machine(), unroll in 1usize..3) {
            let cpm = crate::cpm::parse_cpm("[GAINS]\nA | i0 | o0\n[LOSES]\nA | i1 | *\n[TAUS]\nB | * | o1\n").unwrap();
            let props = crate::ltl::property_library(&cpm)
                .into_iter()
                .chain([crate::ltl::instantiate("x", crate::ltl::parse_ltl("G(!A || !B)").unwrap(), &cpm)])
                .collect::<Vec<_>>();
            let mc = ModelCheck::run(&m, &cpm, &props).unwrap();
            for t in mc.tests(unroll).unwrap() {
                prop_assert!(replay(&t, &mut MachineSul::new(m.clone())).unwrap().confirmed());
            }
        }
    }
}
