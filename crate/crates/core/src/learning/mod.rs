//! Active learning of Mealy machines from a system under learning (SUL).

mod lstar;
mod mapper;
mod oracle;

pub use lstar::{LStar, LearnOutcome, LearnStats, LearnStatus, ObservationTable};
pub use mapper::{canonicalize_nonce_mapper, MappedSul, Mapper, NonceSul, NONCE};
pub use oracle::{exact_oracle, random_walk_oracle, EquivalenceOracle, ExactOracle, RandomWalkOracle};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::MealyMachine;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("input `{0}` is not accepted by the system")]
    UnknownInput(String),
    #[error("nondeterministic output `{symbol}` (previously `{previous}`) after {word:?}")]
    Nondeterministic { word: Vec<String>, symbol: String, previous: String },
    #[error("counterexample {0:?} did not grow the observation table")]
    NoProgress(Vec<String>),
    #[error("counterexample {0:?} is not a counterexample")]
    NotACounterexample(Vec<String>),
    #[error("empty input alphabet")]
    EmptyAlphabet,
    #[error("SUL failure at position {position}: {message}")]
    Sul { position: usize, message: String },
}

/// A resettable, stepwise black box.
pub trait Sul {
    /// Returns to the initial state.
    fn reset(&mut self);

    fn step(&mut self, input: &str) -> Result<String, LearnError>;

    /// Reset, then one step per symbol.
    fn query(&mut self, word: &[String]) -> Result<Vec<String>, LearnError> {
        self.reset();
        word.iter().map(|i| self.step(i)).collect()
    }
}

impl<S: Sul + ?Sized> Sul for &mut S {
    fn reset(&mut self) {
        (**self).reset()
    }

    fn step(&mut self, input: &str) -> Result<String, LearnError> {
        (**self).step(input)
    }
}

/// A SUL simulated by a known machine.
#[derive(Debug, Clone)]
pub struct MachineSul {
    machine: MealyMachine,
    state: usize,
}

impl MachineSul {
    pub fn new(machine: MealyMachine) -> Self {
        let state = machine.initial();
        MachineSul { machine, state }
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }
}

impl Sul for MachineSul {
    fn reset(&mut self) {
        self.state = self.machine.initial();
    }

    fn step(&mut self, input: &str) -> Result<String, LearnError> {
        let i = self.machine.input_id(input).ok_or_else(|| LearnError::UnknownInput(input.to_string()))?;
        let (next, o) = self.machine.step(self.state, i);
        self.state = next;
        Ok(self.machine.output_name(o).to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Exact,
    RandomWalk,
}

/// Learner settings as read from a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub algorithm: String,
    pub oracle: OracleKind,
    pub min_len: usize,
    pub max_len: usize,
    pub num_tests: usize,
    pub seed: u64,
    /// Equivalence queries before giving up with an unproven hypothesis.
    pub max_rounds: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            algorithm: "lstar".into(),
            oracle: OracleKind::RandomWalk,
            min_len: 20,
            max_len: 50,
            num_tests: 50,
            seed: 0,
            max_rounds: 50,
        }
    }
}

impl LearnerConfig {
    /// The oracle this config describes; `hidden` is needed for the exact one.
    pub fn oracle(&self, hidden: Option<&MealyMachine>) -> Box<dyn EquivalenceOracle> {
        match (self.oracle, hidden) {
            (OracleKind::Exact, Some(h)) => Box::new(ExactOracle::new(h.clone())),
            _ => Box::new(RandomWalkOracle::new(self.min_len, self.max_len, self.num_tests, self.seed)),
        }
    }

    /// Learns a model of `sul` over `alphabet` with these settings.
    pub fn learn(
        &self,
        sul: &mut dyn Sul,
        alphabet: &[String],
        hidden: Option<&MealyMachine>,
    ) -> Result<LearnOutcome, LearnError> {
        let mut oracle = self.oracle(hidden);
        LStar::new(alphabet.to_vec())?.with_max_rounds(self.max_rounds).learn(sul, oracle.as_mut())
    }
}
