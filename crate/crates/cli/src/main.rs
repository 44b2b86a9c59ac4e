mod error;
mod pipeline;
mod sources;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mealycheck::actorgen::{apply_timeout_mutation, build_ir_with, emit_rebeca, ActorModelIr, MutationConfig, Naming};
use mealycheck::automata::emit_dot;
use mealycheck::cpm::{annotate_with_report, emit_annotated_dot, expand_tau, AnnotatedMachine};
use mealycheck::learning::{LearnerConfig, OracleKind};
use mealycheck::ltl::{check_all, kripke_from_annotated, parse_report_line, report_json_lines, report_text};
use mealycheck::statespace::{collapse, explore_with, kripke_from_lts, parse_lts_dot, emit_lts_dot, verify_roundtrip, DEFAULT_MAX_NODES};
use mealycheck::testkit::{feedback, read_jsonl, replay, test_from_report, write_jsonl, ReplayVerdict};
use mealycheck::Cpm;

use error::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_VIOLATED: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;

/// Learn, annotate, translate, explore and check Mealy-machine models.
#[derive(Parser)]
#[command(name = "mealycheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a model of a simulated system.
    Learn(LearnArgs),
    /// Label the states of a model with propositions.
    Annotate {
        #[arg(long)]
        model: String,
        #[arg(long)]
        cpm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split transitions that set temporary propositions.
    Expand {
        #[arg(long)]
        annotated: String,
        #[arg(long)]
        cpm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the two-actor Rebeca model.
    GenRebeca {
        #[command(flatten)]
        model: IrArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explore the state space of the generated actor model.
    Explore {
        #[command(flatten)]
        model: IrArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Collapse an explored state space back into a model.
    Collapse {
        #[arg(long)]
        lts: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that translating and exploring reproduces the model.
    VerifyRoundtrip {
        #[arg(long)]
        model: String,
        #[arg(long)]
        cpm: String,
    },
    /// Check LTL properties.
    Check(CheckArgs),
    /// Turn the violations of a report into test cases.
    EmitTest {
        #[arg(long)]
        report: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Times the loop of each lasso is repeated.
        #[arg(long, default_value_t = 1)]
        unroll: usize,
    },
    /// Run test cases against a simulated system.
    Replay {
        #[arg(long)]
        tests: String,
        #[arg(long)]
        sul: String,
        /// JSON report of the verdicts.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Writes the diverging prefixes as learner counterexamples.
        #[arg(long)]
        feedback: Option<PathBuf>,
    },
    /// Run every stage as configured.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct LearnArgs {
    /// Built-in fixture name or a DOT model to simulate.
    #[arg(long)]
    sul: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML learner settings; flags below override them.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_oracle)]
    oracle: Option<OracleKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    num_tests: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Learning statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct IrArgs {
    #[arg(long)]
    annotated: String,
    #[arg(long)]
    cpm: String,
    /// Lets every input time out with this probability.
    #[arg(long)]
    timeout_mutation: Option<f64>,
    #[arg(long, default_value = "")]
    input_prefix: String,
    #[arg(long, default_value = "")]
    output_prefix: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Expanded annotated model.
    #[arg(long, conflicts_with = "lts", required_unless_present = "lts")]
    expanded: Option<String>,
    /// Explored state space, e.g. after a timeout mutation.
    #[arg(long)]
    lts: Option<String>,
    /// Property file, or one of `generic`, `emrtd`, `library`.
    #[arg(long)]
    properties: Option<String>,
    #[arg(long)]
    cpm: String,
    /// JSON-lines report.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_oracle(s: &str) -> Result<OracleKind, String> {
    match s {
        "exact" => Ok(OracleKind::Exact),
        "random-walk" => Ok(OracleKind::RandomWalk),
        _ => Err("expected `exact` or `random-walk`".into()),
    }
}

fn learner_config(args: &LearnArgs) -> Result<LearnerConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => toml::from_str(&sources::read(p)?).map_err(|e| CliError::Config(e.to_string()))?,
        None => LearnerConfig::default(),
    };
    cfg.oracle = args.oracle.unwrap_or(cfg.oracle);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.min_len = args.min_len.unwrap_or(cfg.min_len);
    cfg.max_len = args.max_len.unwrap_or(cfg.max_len);
    cfg.num_tests = args.num_tests.unwrap_or(cfg.num_tests);
    cfg.max_rounds = args.max_rounds.unwrap_or(cfg.max_rounds);
    if cfg.min_len == 0 || cfg.min_len > cfg.max_len {
        return Err(CliError::Usage("walk lengths must satisfy 1 <= min-len <= max-len".into()));
    }
    Ok(cfg)
}

fn learn(args: &LearnArgs) -> Result<u8, CliError> {
    let cfg = learner_config(args)?;
    let (mut sul, alphabet, hidden) = sources::sul(&args.sul)?;
    let out = cfg.learn(sul.as_mut(), &alphabet, Some(&hidden))?;
    sources::emit(args.out.as_deref(), &emit_dot(&out.machine))?;
    let stats = serde_json::json!({
        "sul": args.sul,
        "seed": cfg.seed,
        "status": format!("{:?}", out.status).to_uppercase(),
        "states": out.machine.num_states(),
        "stats": out.stats,
    });
    eprintln!("learned {} states: {}", out.machine.num_states(), stats);
    if let Some(p) = &args.stats {
        sources::write(p, &format!("{stats:#}\n"))?;
    }
    Ok(EXIT_OK)
}

/// The expanded model behind a `--annotated`/`--cpm` pair.
fn load_expanded(annotated: &str, cpm_arg: &str) -> Result<(AnnotatedMachine, Cpm), CliError> {
    let cpm = sources::cpm(cpm_arg)?;
    let a = sources::annotated(annotated)?;
    Ok((expand_tau(&a, &cpm), cpm))
}

fn mutation(p: Option<f64>) -> MutationConfig {
    match p {
        Some(p) => MutationConfig { timeout_enabled: true, timeout_probability: p },
        None => MutationConfig::default(),
    }
}

fn build(args: &IrArgs) -> Result<ActorModelIr, CliError> {
    let (a, cpm) = load_expanded(&args.annotated, &args.cpm)?;
    let naming = Naming { input_prefix: args.input_prefix.clone(), output_prefix: args.output_prefix.clone() };
    let ir = build_ir_with(&a, &cpm, &naming)?;
    Ok(apply_timeout_mutation(&ir, &mutation(args.timeout_mutation))?)
}

fn check(args: &CheckArgs) -> Result<u8, CliError> {
    let cpm = sources::cpm(&args.cpm)?;
    let kripke = match (&args.expanded, &args.lts) {
        (Some(path), _) => kripke_from_annotated(&expand_tau(&sources::annotated(path)?, &cpm)),
        (None, Some(path)) => {
            let lts = parse_lts_dot(&sources::read(Path::new(path))?).map_err(|e| CliError::input(path, e))?;
            kripke_from_lts(&lts)?
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    let props = sources::properties(args.properties.as_deref(), &cpm)?;
    let results = check_all(&kripke, &props)?;
    print!("{}", report_text(&kripke, &results));
    if let Some(p) = &args.report {
        sources::write(p, &report_json_lines(&kripke, &results))?;
    }
    Ok(if results.iter().all(|r| r.verdict.holds()) { EXIT_OK } else { EXIT_VIOLATED })
}

fn emit_test(report: &str, out: Option<&Path>, unroll: usize) -> Result<u8, CliError> {
    let text = sources::read(Path::new(report))?;
    let mut tests = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let entry = parse_report_line(line).map_err(|e| CliError::input(report, e))?;
        if !entry.holds() {
            tests.push(test_from_report(&entry, unroll)?);
        }
    }
    eprintln!("{} test case(s)", tests.len());
    sources::emit(out, &write_jsonl(&tests))?;
    Ok(EXIT_OK)
}

fn replay_tests(tests: &str, sul: &str, report: Option<&Path>, fb: Option<&Path>) -> Result<u8, CliError> {
    let cases = read_jsonl(&sources::read(Path::new(tests))?).map_err(|e| CliError::input(tests, e))?;
    let (mut sul, _, _) = sources::sul(sul)?;
    let mut entries = Vec::new();
    let mut counterexamples = String::new();
    for t in &cases {
        let verdict = replay(t, sul.as_mut())?;
        match &verdict {
            ReplayVerdict::Confirmed => println!("{}: CONFIRMED", t.property),
            ReplayVerdict::Diverged { position, observed } => {
                println!("{}: DIVERGED at position {position}, observed {observed:?}", t.property);
                counterexamples += &(serde_json::to_string(&feedback(t, &verdict)?).expect("serializable") + "\n");
            }
        }
        entries.push(serde_json::json!({ "property": t.property, "inputs": t.inputs, "result": verdict }));
    }
    if let Some(p) = report {
        sources::write(p, &format!("{:#}\n", serde_json::Value::Array(entries)))?;
    }
    if let Some(p) = fb {
        sources::write(p, &counterexamples)?;
    }
    Ok(if counterexamples.is_empty() { EXIT_OK } else { EXIT_DIVERGED })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Learn(args) => learn(&args),
        Command::Annotate { model, cpm, out } => {
            let (a, report) = annotate_with_report(&sources::model(&model)?, &sources::cpm(&cpm)?);
            for (state, prop) in &report.disagreements {
                eprintln!("warning: {state} is reached both with and without {prop}; gain wins");
            }
            sources::emit(out.as_deref(), &emit_annotated_dot(&a))?;
            Ok(EXIT_OK)
        }
        Command::Expand { annotated, cpm, out } => {
            let (a, _) = load_expanded(&annotated, &cpm)?;
            sources::emit(out.as_deref(), &emit_annotated_dot(&a))?;
            Ok(EXIT_OK)
        }
        Command::GenRebeca { model, out } => {
            sources::emit(out.as_deref(), &emit_rebeca(&build(&model)?))?;
            Ok(EXIT_OK)
        }
        Command::Explore { model, max_nodes, out } => {
            let lts = explore_with(&build(&model)?, max_nodes)?;
            eprintln!("{} nodes, {} edges", lts.nodes.len(), lts.edges.len());
            sources::emit(out.as_deref(), &emit_lts_dot(&lts))?;
            Ok(EXIT_OK)
        }
        Command::Collapse { lts, out } => {
            let parsed = parse_lts_dot(&sources::read(Path::new(&lts))?).map_err(|e| CliError::input(&lts, e))?;
            sources::emit(out.as_deref(), &collapse(&parsed)?.to_dot()?)?;
            Ok(EXIT_OK)
        }
        Command::VerifyRoundtrip { model, cpm } => {
            let cpm = sources::cpm(&cpm)?;
            let a = mealycheck::cpm::annotate(&sources::model(&model)?, &cpm);
            let r = verify_roundtrip(&a, &cpm)?;
            if r.passed() {
                println!("PASS ({} LTS nodes, {} states)", r.lts_nodes, r.macro_states);
                Ok(EXIT_OK)
            } else {
                println!("FAIL {:?}", r.verdict);
                Ok(EXIT_FAILED)
            }
        }
        Command::Check(args) => check(&args),
        Command::EmitTest { report, out, unroll } => emit_test(&report, out.as_deref(), unroll),
        Command::Replay { tests, sul, report, feedback } => {
            replay_tests(&tests, &sul, report.as_deref(), feedback.as_deref())
        }
        Command::Pipeline { config } => pipeline::run(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
