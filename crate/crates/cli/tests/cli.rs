use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mealycheck")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn example_pipeline_is_clean_and_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!(
        "sul = \"example\"\ncpm = \"{}\"\nproperties = \"library\"\nout_dir = \"out\"\n[learner]\noracle = \"exact\"\n",
        fixture("example.cpm")
    );
    fs::write(tmp.path().join("cfg.toml"), &cfg).unwrap();
    let first = run(tmp.path(), &["pipeline", "--config", "cfg.toml"]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let out = tmp.path().join("out");
    let report = read(&out, "report.json");
    assert_eq!(report.lines().count(), 7);
    assert!(report.lines().all(|l| l.contains("\"verdict\":\"HOLDS\"")));
    assert_eq!(read(&out, "tests.jsonl"), "");
    assert_eq!(read(&out, "model.rebeca"), fs::read_to_string(fixture("example.rebeca")).unwrap());

    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["violations"], 0);
    assert_eq!(manifest["seeds"]["learner"], 0);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["outputs"]["lts.dot"].is_string());

    let names = ["model.dot", "annotated.dot", "expanded.dot", "model.rebeca", "lts.dot", "collapsed.dot", "report.json", "manifest.json"];
    let before: Vec<String> = names.iter().map(|n| read(&out, n)).collect();
    assert_eq!(code(&run(tmp.path(), &["pipeline", "--config", "cfg.toml"])), 0);
    let after: Vec<String> = names.iter().map(|n| read(&out, n)).collect();
    assert_eq!(before, after);
}

#[test]
fn uds_check_names_p4_and_tests_replay() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(code(&run(d, &["annotate", "--model", "uds", "--cpm", "uds", "--out", "a.dot"])), 0);
    assert_eq!(code(&run(d, &["expand", "--annotated", "a.dot", "--cpm", "uds", "--out", "e.dot"])), 0);
    let check = run(d, &["check", "--expanded", "e.dot", "--cpm", "uds", "--report", "report.json"]);
    assert_eq!(code(&check), 2);
    assert!(String::from_utf8_lossy(&check.stdout).contains("P4: VIOLATED"));
    let violated: Vec<_> = read(d, "report.json").lines().filter(|l| l.contains("VIOLATED")).map(str::to_string).collect();
    assert_eq!(violated.len(), 1);
    assert!(violated[0].starts_with("{\"name\":\"P4\""));

    assert_eq!(code(&run(d, &["emit-test", "--report", "report.json", "--out", "tests.jsonl"])), 0);
    assert!(read(d, "tests.jsonl").contains("\"inputs\":[\"Extended\",\"SA\",\"SAwKey\",\"SAwWrongKey\"]"));
    let confirmed = run(d, &["replay", "--tests", "tests.jsonl", "--sul", "uds", "--report", "replay.json"]);
    assert_eq!(code(&confirmed), 0);
    assert!(read(d, "replay.json").contains("CONFIRMED"));
    let diverged = run(d, &["replay", "--tests", "tests.jsonl", "--sul", "uds-patched", "--feedback", "ce.jsonl"]);
    assert_eq!(code(&diverged), 3);
    assert_eq!(read(d, "ce.jsonl"), "[\"Extended\",\"SA\",\"SAwKey\",\"SAwWrongKey\"]\n");
}

#[test]
fn empty_map_gives_empty_labels() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.cpm"), "").unwrap();
    let o = run(tmp.path(), &["annotate", "--model", "example", "--cpm", "empty.cpm"]);
    assert_eq!(code(&o), 0);
    let dot = String::from_utf8(o.stdout).unwrap();
    assert!(dot.contains("label=\"q1 {}\"") && dot.contains("label=\"q2 {}\""), "{dot}");
}

#[test]
fn stages_chain_through_files() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let learn = run(d, &["learn", "--sul", "emrtd", "--oracle", "exact", "--out", "m.dot", "--stats", "s.json"]);
    assert_eq!(code(&learn), 0, "{}", String::from_utf8_lossy(&learn.stderr));
    assert!(read(d, "s.json").contains("\"CONVERGED\""));
    assert_eq!(code(&run(d, &["verify-roundtrip", "--model", "m.dot", "--cpm", "emrtd"])), 0);
    assert_eq!(code(&run(d, &["annotate", "--model", "m.dot", "--cpm", "emrtd", "--out", "a.dot"])), 0);
    let gen = ["gen-rebeca", "--annotated", "a.dot", "--cpm", "emrtd", "--input-prefix", "pp_", "--output-prefix", "req_"];
    let rebeca = run(d, &gen);
    assert!(String::from_utf8_lossy(&rebeca.stdout).contains("msgsrv pp_bac()"));
    let explore = ["explore", "--annotated", "a.dot", "--cpm", "emrtd", "--timeout-mutation", "0.1", "--out", "lts.dot"];
    assert_eq!(code(&run(d, &explore)), 0);
    assert_eq!(code(&run(d, &["collapse", "--lts", "lts.dot", "--out", "c.dot"])), 0);
    assert!(read(d, "c.dot").contains("timeout"));
    let check = run(d, &["check", "--lts", "lts.dot", "--cpm", "emrtd", "--properties", "emrtd"]);
    assert_eq!(code(&check), 0, "{}", String::from_utf8_lossy(&check.stdout));
}

#[test]
fn usage_errors_exit_64() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["check", "--bogus"])), 64);
    assert_eq!(code(&run(tmp.path(), &[])), 64);
    let o = run(tmp.path(), &["learn", "--sul", "no-such-thing"]);
    assert_eq!(code(&o), 64);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-thing"));
    assert_eq!(code(&run(tmp.path(), &["learn", "--sul", "uds", "--min-len", "9", "--max-len", "3"])), 64);
    assert_eq!(code(&run(tmp.path(), &["--help"])), 0);
}

#[test]
fn bad_input_files_exit_1() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("bad.dot"), "not a graph").unwrap();
    let o = run(tmp.path(), &["annotate", "--model", "bad.dot", "--cpm", "empty"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: bad.dot"));
}
