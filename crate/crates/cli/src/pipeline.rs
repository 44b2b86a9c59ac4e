use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mealycheck::actorgen::{apply_timeout_mutation, build_ir_with, emit_rebeca, MutationConfig, Naming};
use mealycheck::automata::emit_dot;
use mealycheck::cpm::{annotate_with_report, emit_annotated_dot, expand_tau};
use mealycheck::learning::LearnerConfig;
use mealycheck::ltl::{check_all, report_json_lines, report_text, ReportLine};
use mealycheck::statespace::{collapse, emit_lts_dot, explore_with, verify_roundtrip, DEFAULT_MAX_NODES};
use mealycheck::testkit::{replay, test_from_report, write_jsonl, ReplayVerdict};

use crate::error::CliError;
use crate::sources;
use crate::{EXIT_DIVERGED, EXIT_FAILED, EXIT_OK, EXIT_VIOLATED};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Fixture name or DOT model to learn from.
    pub sul: Option<String>,
    /// A model to start from instead of learning one.
    pub model: Option<String>,
    pub cpm: String,
    /// Property file or built-in set; P1 to P4 by default.
    pub properties: Option<String>,
    pub out_dir: PathBuf,
    /// System the emitted tests are replayed on; the learned one by default.
    pub replay_sul: Option<String>,
    #[serde(default = "default_unroll")]
    pub unroll: usize,
    #[serde(default = "default_max_nodes")]
    pub max_nodes: usize,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub mutation: Mutation,
    #[serde(default)]
    pub naming: NamingConfig,
}

fn default_unroll() -> usize {
    1
}

fn default_max_nodes() -> usize {
    DEFAULT_MAX_NODES
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mutation {
    pub timeout_enabled: bool,
    pub timeout_probability: f64,
}

impl Default for Mutation {
    fn default() -> Self {
        let d = MutationConfig::default();
        Mutation { timeout_enabled: d.timeout_enabled, timeout_probability: d.timeout_probability }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NamingConfig {
    pub input_prefix: String,
    pub output_prefix: String,
}

/// Paths in the config are relative to the config file; names that are not
/// files there are left alone (they may be fixtures).
fn resolve(base: &Path, arg: &str) -> String {
    let p = base.join(arg);
    if p.exists() {
        p.to_string_lossy().into_owned()
    } else {
        arg.to_string()
    }
}

struct Outputs {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl Outputs {
    fn put(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        sources::write(&self.dir.join(name), text)?;
        self.hashes.insert(name.to_string(), hex(&Sha256::digest(text.as_bytes())));
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run(config: &Path) -> Result<u8, CliError> {
    let raw = sources::read(config)?;
    let cfg: PipelineConfig = toml::from_str(&raw).map_err(|e| CliError::Config(e.to_string()))?;
    let base = config.parent().unwrap_or(Path::new(""));
    let mut out = Outputs { dir: base.join(&cfg.out_dir), hashes: BTreeMap::new() };

    // learn or load
    let (model, learned_from) = match (&cfg.sul, &cfg.model) {
        (Some(sul), None) => {
            let arg = resolve(base, sul);
            let (mut s, alphabet, hidden) = sources::sul(&arg)?;
            let outcome = cfg.learner.learn(s.as_mut(), &alphabet, Some(&hidden))?;
            let stats = serde_json::json!({ "status": format!("{:?}", outcome.status).to_uppercase(), "stats": outcome.stats });
            out.put("learn.json", &format!("{stats:#}\n"))?;
            eprintln!("learn: {} states ({stats})", outcome.machine.num_states());
            (outcome.machine, Some(arg))
        }
        (None, Some(model)) => (sources::model(&resolve(base, model))?, None),
        _ => return Err(CliError::Config("set exactly one of `sul` and `model`".into())),
    };
    out.put("model.dot", &emit_dot(&model))?;

    let cpm = sources::cpm(&resolve(base, &cfg.cpm))?;
    let (annotated, report) = annotate_with_report(&model, &cpm);
    for (state, prop) in &report.disagreements {
        eprintln!("annotate: warning: {state} is reached both with and without {prop}");
    }
    out.put("annotated.dot", &emit_annotated_dot(&annotated))?;
    let expanded = expand_tau(&annotated, &cpm);
    out.put("expanded.dot", &emit_annotated_dot(&expanded))?;

    let naming = Naming { input_prefix: cfg.naming.input_prefix.clone(), output_prefix: cfg.naming.output_prefix.clone() };
    let mutation = MutationConfig {
        timeout_enabled: cfg.mutation.timeout_enabled,
        timeout_probability: cfg.mutation.timeout_probability,
    };
    let ir = apply_timeout_mutation(&build_ir_with(&expanded, &cpm, &naming)?, &mutation)?;
    out.put("model.rebeca", &emit_rebeca(&ir))?;
    let lts = explore_with(&ir, cfg.max_nodes)?;
    out.put("lts.dot", &emit_lts_dot(&lts))?;
    let collapsed = collapse(&lts)?;
    out.put("collapsed.dot", &collapsed.to_dot()?)?;
    eprintln!("explore: {} nodes, {} edges, {} states", lts.nodes.len(), lts.edges.len(), collapsed.states.len());

    let roundtrip = verify_roundtrip(&annotated, &cpm)?;
    eprintln!("verify-roundtrip: {}", if roundtrip.passed() { "PASS" } else { "FAIL" });

    let props = sources::properties(cfg.properties.as_ref().map(|p| resolve(base, p)).as_deref(), &cpm)?;
    let kripke = collapsed.to_kripke();
    let results = check_all(&kripke, &props)?;
    out.put("report.json", &report_json_lines(&kripke, &results))?;
    out.put("report.txt", &report_text(&kripke, &results))?;
    let violations = results.iter().filter(|r| !r.verdict.holds()).count();
    eprintln!("check: {} properties, {violations} violated", results.len());

    let tests = results
        .iter()
        .filter(|r| !r.verdict.holds())
        .map(|r| test_from_report(&ReportLine::from_result(&kripke, r), cfg.unroll))
        .collect::<Result<Vec<_>, _>>()?;
    out.put("tests.jsonl", &write_jsonl(&tests))?;

    let replay_from = match (&cfg.replay_sul, &learned_from) {
        (Some(s), _) => Some(resolve(base, s)),
        (None, from) => from.clone(),
    };
    let mut diverged = 0;
    if let Some(arg) = replay_from {
        let (mut sul, _, _) = sources::sul(&arg)?;
        let mut entries = Vec::new();
        for t in &tests {
            let verdict = replay(t, sul.as_mut())?;
            if !verdict.confirmed() {
                diverged += 1;
            }
            let shown = match &verdict {
                ReplayVerdict::Confirmed => "CONFIRMED".to_string(),
                ReplayVerdict::Diverged { position, .. } => format!("DIVERGED at {position}"),
            };
            eprintln!("replay {}: {shown}", t.property);
            entries.push(serde_json::json!({ "property": t.property, "inputs": t.inputs, "result": verdict }));
        }
        out.put("replay.json", &format!("{:#}\n", serde_json::Value::Array(entries)))?;
    }

    let manifest = serde_json::json!({
        "tool": "mealycheck",
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": hex(&Sha256::digest(raw.as_bytes())),
        "seeds": { "learner": cfg.learner.seed },
        "config": cfg,
        "roundtrip": if roundtrip.passed() { "PASS" } else { "FAIL" },
        "violations": violations,
        "diverged": diverged,
        "outputs": out.hashes,
    });
    sources::write(&out.dir.join("manifest.json"), &format!("{manifest:#}\n"))?;

    Ok(if !roundtrip.passed() {
        EXIT_FAILED
    } else if diverged > 0 {
        EXIT_DIVERGED
    } else if violations > 0 {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    })
}
