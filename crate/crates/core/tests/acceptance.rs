//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its own line.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mealycheck::actorgen::{apply_timeout_mutation, build_ir, emit_rebeca, MutationConfig, TIMEOUT_PROP};
use mealycheck::automata::{bisimilar, Equivalence};
use mealycheck::cpm::{annotate, expand_tau, parse_cpm};
use mealycheck::fixtures::{self, Fixture};
use mealycheck::learning::{ExactOracle, LStar, LearnerConfig, OracleKind};
use mealycheck::ltl::{
    and, bounded_oracle, check, check_all, finally, globally, implies, load_properties, next,
    not, or, prop, release, until, Formula, Kripke, OracleVerdict, Verdict,
};
use mealycheck::statespace::{collapse, explore, kripke_from_lts, verify_roundtrip, TIMEOUT};
use mealycheck::testkit::{feedback, replay, ModelCheck, ReplayVerdict};
use mealycheck::{Cpm, MealyMachine};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn words(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn example_fidelity() -> Outcome {
    let f = fixtures::example();
    let cpm = fixtures::example_cpm();
    let a = annotate(&f.machine, &cpm);
    ensure!(a.label_of("q1") == Some(&set(&[])), "q1 labeled {:?}", a.label_of("q1"));
    ensure!(a.label_of("q2") == Some(&set(&["p"])), "q2 labeled {:?}", a.label_of("q2"));
    let e = expand_tau(&a, &cpm);
    ensure!(e.taus().len() == 1, "{} tau states", e.taus().len());
    ensure!(e.taus()[0].temps == set(&["omega2set"]), "tau temps {:?}", e.taus()[0].temps);
    let text = emit_rebeca(&build_ir(&e, &cpm).map_err(|e| e.to_string())?);
    ensure!(text == fixtures::EXAMPLE_REBECA, "Rebeca text differs from the golden file:\n{text}");
    Ok("labels, tau state and Rebeca text match".into())
}

/// A random complete machine with up to 8 states and 5 inputs, and a map
/// over at most three propositions.
fn random_case(seed: u64) -> (MealyMachine, Cpm) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=8);
    let k = rng.gen_range(1..=5);
    let mut b = MealyMachine::builder().initial("s0");
    for q in 0..n {
        for i in 0..k {
            let to = rng.gen_range(0..n);
            let o = rng.gen_range(0..3);
            b = b.transition(&format!("s{q}"), &format!("i{i}"), &format!("o{o}"), &format!("s{to}"));
        }
    }
    let mut text = String::new();
    let props = rng.gen_range(0..=2);
    let mut gains = String::new();
    let mut loses = String::new();
    for p in 0..props {
        gains += &format!("P{p} | i{} | o{}\n", rng.gen_range(0..k), rng.gen_range(0..3));
        loses += &format!("P{p} | i{} | *\n", rng.gen_range(0..k));
    }
    text += &format!("[GAINS]\n{gains}[LOSES]\n{loses}");
    if rng.gen_bool(0.7) {
        text += &format!("[TAUS]\nT0 | * | o{}\n", rng.gen_range(0..3));
    }
    (b.build().expect("complete by construction"), parse_cpm(&text).expect("generated map parses"))
}

fn round_trips() -> Outcome {
    let mut cases = vec![
        ("example".to_string(), fixtures::example().machine, fixtures::example_cpm()),
        ("emrtd".to_string(), fixtures::emrtd().machine, fixtures::emrtd_cpm()),
        ("uds".to_string(), fixtures::uds().machine, fixtures::uds_cpm()),
    ];
    cases.extend((0..100).map(|seed| {
        let (m, c) = random_case(seed);
        (format!("random #{seed}"), m, c)
    }));
    let mut passed = 0;
    for (name, m, cpm) in &cases {
        let r = verify_roundtrip(&annotate(m, cpm), cpm).map_err(|e| format!("{name}: {e}"))?;
        ensure!(r.passed(), "{name}: {:?}", r.verdict);
        passed += 1;
    }
    Ok(format!("{passed}/{} round trips pass (3 fixtures + 100 random)", cases.len()))
}

fn fixture_results(f: &Fixture, cpm: &Cpm, props: &str) -> Result<ModelCheck, String> {
    let props = load_properties(props, cpm).map_err(|e| e.to_string())?;
    ModelCheck::run(&f.machine, cpm, &props).map_err(|e| e.to_string())
}

fn emrtd_verdicts() -> Outcome {
    let mc = fixture_results(&fixtures::emrtd(), &fixtures::emrtd_cpm(), fixtures::EMRTD_PROPERTIES)?;
    let names: Vec<_> = mc.results.iter().map(|r| r.property.name.as_str()).collect();
    let expected = ["P1", "P2", "P3", "P4", "SecureRead", "PlainRead", "SecureReadFollowsSecureSelect"];
    ensure!(names == expected, "checked {names:?}");
    for r in &mc.results {
        ensure!(r.verdict.holds(), "{} VIOLATED", r.property.name);
    }
    Ok("all 7 properties HOLD".into())
}

fn uds_verdicts() -> Outcome {
    let f = fixtures::uds();
    let mc = fixture_results(&f, &fixtures::uds_cpm(), fixtures::GENERIC_PROPERTIES)?;
    let get = |n: &str| mc.results.iter().find(|r| r.property.name == n).unwrap();
    ensure!(get("P1").verdict.holds(), "P1 VIOLATED");
    ensure!(get("P3").verdict.holds(), "P3 VIOLATED");
    let p2 = get("P2");
    ensure!(p2.verdict.holds() && p2.vacuous(), "P2 is not a vacuous HOLD");
    ensure!(
        p2.vacuity.iter().any(|v| !v.cooccurs && v.antecedent.contains("PROT") && v.consequent.contains("UREADOK")),
        "vacuity report does not flag PROT with UREADOK: {:?}",
        p2.vacuity
    );
    let p4 = get("P4");
    let Verdict::Violated(lasso) = &p4.verdict else {
        return Err("P4 HOLDS".into());
    };
    let tests = mc.tests(1).map_err(|e| e.to_string())?;
    let t = tests.iter().find(|t| t.property == "P4").ok_or("no test for P4")?;
    ensure!(t.inputs.last().map(String::as_str) == Some("SAwWrongKey"), "test ends with {:?}", t.inputs.last());
    ensure!(t.expected_outputs.last().map(String::as_str) == Some("67"), "final output {:?}", t.expected_outputs);
    // the wrong key is only accepted once authenticated
    let m = &f.machine;
    let a = annotate(m, &fixtures::uds_cpm());
    let before = m.state_after(&t.inputs[..t.inputs.len() - 1]).ok_or("test leaves the model")?;
    ensure!(a.labels(before).contains("AUTH"), "wrong key accepted in {}", m.state_name(before));
    let wrong_key = m.input_id("SAwWrongKey").unwrap();
    for q in 0..m.num_states() {
        let accepted = m.output_name(m.step(q, wrong_key).1) == "67";
        ensure!(!accepted || a.labels(q).contains("AUTH"), "{} accepts a wrong key", m.state_name(q));
    }
    let verdict = replay(t, &mut fixtures::uds_sul(&f)).map_err(|e| e.to_string())?;
    ensure!(verdict == ReplayVerdict::Confirmed, "replay {verdict:?}");
    let (stem, cycle) = lasso.names(&mc.kripke);
    let vacuous: Vec<_> = mc.results.iter().filter(|r| r.vacuous()).map(|r| r.property.name.as_str()).collect();
    Ok(format!(
        "P1, P2, P3 HOLD (vacuously: {}); P4 VIOLATED (stem {stem:?}, loop {cycle:?}), replay CONFIRMED",
        vacuous.join(", ")
    ))
}

fn random_kripke(rng: &mut ChaCha8Rng) -> Kripke {
    let n = rng.gen_range(1..=6);
    let mut k = Kripke::default();
    for s in 0..n {
        let labels = ["a", "b", "c"].into_iter().filter(|_| rng.gen_bool(0.5)).collect::<Vec<_>>();
        k.add_state(&format!("k{s}"), set(&labels));
    }
    for s in 0..n {
        for _ in 0..rng.gen_range(1..=2) {
            let t = rng.gen_range(0..n);
            if !k.has_edge(s, t) {
                k.add_edge(s, t, "x", "y");
            }
        }
    }
    k
}

fn random_formula(rng: &mut ChaCha8Rng, temporal: u32, depth: u32) -> Formula {
    let atom = |rng: &mut ChaCha8Rng| prop(["a", "b", "c"][rng.gen_range(0..3)]);
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.2) { not(atom(rng)) } else { atom(rng) };
    }
    let choice = if temporal == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..10) };
    let left = temporal / 2;
    let right = temporal.saturating_sub(1) - left;
    match choice {
        0 => not(random_formula(rng, temporal, depth - 1)),
        1 => and(random_formula(rng, left, depth - 1), random_formula(rng, right, depth - 1)),
        2 => or(random_formula(rng, left, depth - 1), random_formula(rng, right, depth - 1)),
        3 => implies(random_formula(rng, left, depth - 1), random_formula(rng, right, depth - 1)),
        4 => next(random_formula(rng, temporal - 1, depth - 1)),
        5 | 6 => globally(random_formula(rng, temporal - 1, depth - 1)),
        7 => finally(random_formula(rng, temporal - 1, depth - 1)),
        8 => until(random_formula(rng, left, depth - 1), random_formula(rng, right, depth - 1)),
        _ => release(random_formula(rng, left, depth - 1), random_formula(rng, right, depth - 1)),
    }
}

fn checker_agreement() -> Outcome {
    let mut agreed = 0;
    let mut violated = 0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_kripke(&mut rng);
        let f = random_formula(&mut rng, 4, 5);
        ensure!(f.temporal_operators() <= 4, "generator produced {f}");
        let n = k.num_states();
        let verdict = check(&k, &f).map_err(|e| format!("seed {seed}: {e}"))?;
        let oracle = bounded_oracle(&k, &f, n, 2 * n).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(
            verdict.holds() == (oracle == OracleVerdict::BoundedHolds),
            "seed {seed}: check {verdict:?}, oracle {oracle:?} on {f}"
        );
        if let Verdict::Violated(l) = &verdict {
            ensure!(l.is_path_of(&k) && !l.satisfies(&k, &f), "seed {seed}: lasso {l:?} does not falsify {f}");
            violated += 1;
        }
        agreed += 1;
    }
    Ok(format!("{agreed}/200 agree ({violated} violated, every lasso falsifies its formula)"))
}

fn learning_convergence() -> Outcome {
    let emrtd = fixtures::emrtd();
    let uds = fixtures::uds();
    // exact oracle
    let exact = LearnerConfig { oracle: OracleKind::Exact, ..LearnerConfig::default() };
    let learned = exact
        .learn(&mut mealycheck::learning::MachineSul::new(emrtd.machine.clone()), &words(fixtures::EMRTD_INPUTS), Some(&emrtd.machine))
        .map_err(|e| e.to_string())?;
    ensure!(bisimilar(&learned.machine, &emrtd.machine).unwrap() == Equivalence::Equivalent, "eMRTD not recovered");
    let learned = exact
        .learn(&mut fixtures::uds_sul(&uds), &words(fixtures::UDS_INPUTS), Some(&uds.machine))
        .map_err(|e| e.to_string())?;
    ensure!(bisimilar(&learned.machine, &uds.machine).unwrap() == Equivalence::Equivalent, "UDS not recovered");

    let mut summary = Vec::new();
    for (name, hidden, min_len, num_tests) in [("eMRTD", &emrtd, 40, 150), ("UDS", &uds, 20, 50)] {
        let mut good = 0;
        let mut max_mq = 0;
        for seed in 0..10 {
            let cfg = LearnerConfig { min_len, max_len: 50, num_tests, seed, ..LearnerConfig::default() };
            let out = if name == "UDS" {
                cfg.learn(&mut fixtures::uds_sul(hidden), &words(fixtures::UDS_INPUTS), None)
            } else {
                cfg.learn(&mut mealycheck::learning::MachineSul::new(hidden.machine.clone()), &words(fixtures::EMRTD_INPUTS), None)
            }
            .map_err(|e| format!("{name} seed {seed}: {e}"))?;
            ensure!(out.stats.membership_queries <= 20_000, "{name} seed {seed}: {} membership queries", out.stats.membership_queries);
            max_mq = max_mq.max(out.stats.membership_queries);
            if bisimilar(&out.machine, &hidden.machine).unwrap() == Equivalence::Equivalent {
                good += 1;
            }
        }
        ensure!(good >= 9, "{name}: only {good}/10 seeds converged");
        summary.push(format!("{name} {good}/10 (max {max_mq} MQ)"));
    }
    Ok(format!("exact oracle recovers both; random walks: {}", summary.join(", ")))
}

fn mutation_behavior() -> Outcome {
    let cpm = fixtures::emrtd_cpm();
    let f = fixtures::emrtd();
    let e = expand_tau(&annotate(&f.machine, &cpm), &cpm);
    let ir = build_ir(&e, &cpm).map_err(|e| e.to_string())?;
    let cfg = MutationConfig { timeout_enabled: true, timeout_probability: 0.1 };
    let ir = apply_timeout_mutation(&ir, &cfg).map_err(|e| e.to_string())?;
    let lts = explore(&ir).map_err(|e| e.to_string())?;
    let c = collapse(&lts).map_err(|e| e.to_string())?;
    ensure!(c.labels[c.initial] == *e.labels(f.machine.initial()), "initial labels changed");
    let reachable: BTreeSet<usize> = c.transitions.iter().map(|t| t.to).chain([c.initial]).collect();
    let mut branches = 0;
    for &s in &reachable {
        for input in fixtures::EMRTD_INPUTS {
            let ok = c.transitions_from(s, input).any(|t| {
                t.output == TIMEOUT && t.to == c.initial && t.temps == set(&[TIMEOUT_PROP])
            });
            ensure!(ok, "no timeout branch from {} on {input}", c.states[s]);
            branches += 1;
        }
    }
    let k = kripke_from_lts(&lts).map_err(|e| e.to_string())?;
    let props = load_properties(fixtures::EMRTD_PROPERTIES, &cpm).map_err(|e| e.to_string())?;
    let results = check_all(&k, &props).map_err(|e| e.to_string())?;
    for r in &results {
        ensure!(r.verdict.holds(), "{} VIOLATED under mutation", r.property.name);
    }
    Ok(format!("{branches} timeout branches to the initial state; all {} properties still HOLD", results.len()))
}

fn closed_loop() -> Outcome {
    let cpm = fixtures::uds_cpm();
    let props = load_properties(fixtures::GENERIC_PROPERTIES, &cpm).map_err(|e| e.to_string())?;
    let uds = fixtures::uds();
    let mut lstar = LStar::new(words(fixtures::UDS_INPUTS)).map_err(|e| e.to_string())?;
    let model = lstar
        .learn(&mut fixtures::uds_sul(&uds), &mut ExactOracle::new(uds.machine.clone()))
        .map_err(|e| e.to_string())?
        .machine;
    let mc = ModelCheck::run(&model, &cpm, &props).map_err(|e| e.to_string())?;
    let tests = mc.tests(1).map_err(|e| e.to_string())?;
    let t = tests.iter().find(|t| t.property == "P4").ok_or("learned model satisfies P4")?;

    let patched = fixtures::uds_patched();
    let mut sul = fixtures::uds_sul(&patched);
    let verdict = replay(t, &mut sul).map_err(|e| e.to_string())?;
    ensure!(matches!(verdict, ReplayVerdict::Diverged { .. }), "replay on the patched ECU: {verdict:?}");
    let ce = feedback(t, &verdict).map_err(|e| e.to_string())?;
    let refined = lstar.refine(&mut sul, &ce).map_err(|e| e.to_string())?;
    let mc = ModelCheck::run(&refined, &cpm, &props).map_err(|e| e.to_string())?;
    let p4 = mc.results.iter().find(|r| r.property.name == "P4").unwrap();
    ensure!(p4.verdict.holds(), "P4 still VIOLATED after one refinement");
    Ok(format!("replay DIVERGED on {ce:?}; after one refinement P4 HOLDS"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("example fidelity", Duration::from_secs(1), example_fidelity),
        ("round-trip theorem", Duration::from_secs(30), round_trips),
        ("eMRTD verdicts", Duration::from_secs(5), emrtd_verdicts),
        ("UDS verdicts", Duration::from_secs(5), uds_verdicts),
        ("checker correctness", Duration::from_secs(60), checker_agreement),
        ("learning convergence", Duration::from_secs(60), learning_convergence),
        ("mutation behavior", Duration::from_secs(10), mutation_behavior),
        ("closed loop", Duration::from_secs(30), closed_loop),
    ];
    let mut failures = 0;
    for (n, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({elapsed:.2?}) {detail}", n + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} {name}: FAIL ({elapsed:.2?}) {why}", n + 1);
            }
        }
    }
    println!("acceptance: {}/8 criteria pass", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
