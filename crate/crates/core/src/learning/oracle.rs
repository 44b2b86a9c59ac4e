use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LearnError, Sul};
use crate::automata::{bisimilar_on_shared_inputs, Equivalence, MealyMachine};

/// Answers equivalence queries with a counterexample or `None`.
pub trait EquivalenceOracle {
    fn find_counterexample(
        &mut self,
        sul: &mut dyn Sul,
        hypothesis: &MealyMachine,
    ) -> Result<Option<Vec<String>>, LearnError>;

    /// Test words sent to the SUL so far.
    fn queries(&self) -> usize {
        0
    }
}

/// Conformance testing with uniformly random words.
#[derive(Debug, Clone)]
pub struct RandomWalkOracle {
    pub min_len: usize,
    pub max_len: usize,
    pub num_tests: usize,
    rng: ChaCha8Rng,
    queries: usize,
}

impl RandomWalkOracle {
    pub fn new(min_len: usize, max_len: usize, num_tests: usize, seed: u64) -> Self {
        assert!(1 <= min_len && min_len <= max_len, "walk lengths must satisfy 1 <= min <= max");
        RandomWalkOracle { min_len, max_len, num_tests, rng: ChaCha8Rng::seed_from_u64(seed), queries: 0 }
    }
}

impl EquivalenceOracle for RandomWalkOracle {
    fn find_counterexample(
        &mut self,
        sul: &mut dyn Sul,
        hypothesis: &MealyMachine,
    ) -> Result<Option<Vec<String>>, LearnError> {
        let alphabet = hypothesis.inputs();
        for _ in 0..self.num_tests {
            let len = self.rng.gen_range(self.min_len..=self.max_len);
            let word: Vec<String> =
                (0..len).map(|_| alphabet[self.rng.gen_range(0..alphabet.len())].clone()).collect();
            self.queries += 1;
            sul.reset();
            let mut q = hypothesis.initial();
            for (k, sym) in word.iter().enumerate() {
                let (next, o) = hypothesis.step(q, hypothesis.input_id(sym).unwrap());
                if sul.step(sym)? != hypothesis.output_name(o) {
                    return Ok(Some(word[..=k].to_vec()));
                }
                q = next;
            }
        }
        Ok(None)
    }

    fn queries(&self) -> usize {
        self.queries
    }
}

/// One-shot random walk check; see [`RandomWalkOracle`].
pub fn random_walk_oracle(
    sul: &mut dyn Sul,
    hypothesis: &MealyMachine,
    min_len: usize,
    max_len: usize,
    num_tests: usize,
    seed: u64,
) -> Result<Option<Vec<String>>, LearnError> {
    RandomWalkOracle::new(min_len, max_len, num_tests, seed).find_counterexample(sul, hypothesis)
}

/// Compares against the machine behind a simulated SUL.
#[derive(Debug, Clone)]
pub struct ExactOracle {
    hidden: MealyMachine,
}

impl ExactOracle {
    pub fn new(hidden: MealyMachine) -> Self {
        ExactOracle { hidden }
    }
}

impl EquivalenceOracle for ExactOracle {
    fn find_counterexample(
        &mut self,
        _sul: &mut dyn Sul,
        hypothesis: &MealyMachine,
    ) -> Result<Option<Vec<String>>, LearnError> {
        Ok(exact_oracle(&self.hidden, hypothesis))
    }
}

/// A shortest distinguishing word, if the machines differ.
pub fn exact_oracle(hidden: &MealyMachine, hypothesis: &MealyMachine) -> Option<Vec<String>> {
    match bisimilar_on_shared_inputs(hidden, hypothesis) {
        Equivalence::Equivalent => None,
        Equivalence::Inequivalent { witness } => Some(witness),
    }
}
