use std::collections::HashMap;

use serde::Serialize;

use super::{EquivalenceOracle, LearnError, Sul};
use crate::automata::MealyMachine;

/// Rows are input words, columns are suffixes; a cell holds the outputs
/// produced while reading the suffix after the row's word.
#[derive(Debug, Clone, Default)]
pub struct ObservationTable {
    /// Short rows, `ε` first.
    pub prefixes: Vec<Vec<String>>,
    pub suffixes: Vec<Vec<String>>,
    cells: HashMap<(Vec<String>, usize), Vec<String>>,
}

impl ObservationTable {
    pub fn cell(&self, prefix: &[String], suffix: usize) -> Option<&Vec<String>> {
        self.cells.get(&(prefix.to_vec(), suffix))
    }

    fn row(&self, prefix: &[String]) -> Vec<&Vec<String>> {
        (0..self.suffixes.len()).map(|e| &self.cells[&(prefix.to_vec(), e)]).collect()
    }

    /// Every `(prefix, suffix index)` that has a value.
    pub fn filled(&self) -> impl Iterator<Item = (&Vec<String>, usize, &Vec<String>)> {
        self.cells.iter().map(|((p, e), v)| (p, *e, v))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LearnStats {
    /// Queries that reached the SUL (cache misses).
    pub membership_queries: usize,
    pub equivalence_queries: usize,
    /// Test words the equivalence oracle ran.
    pub test_queries: usize,
    pub rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LearnStatus {
    /// The oracle found no counterexample for the final hypothesis.
    Converged,
    /// The round budget ran out first.
    Unproven,
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub machine: MealyMachine,
    pub stats: LearnStats,
    pub status: LearnStatus,
}

/// Angluin-style learner for Mealy machines; counterexamples add all their
/// prefixes as short rows.
#[derive(Debug, Clone)]
pub struct LStar {
    alphabet: Vec<String>,
    table: ObservationTable,
    cache: HashMap<Vec<String>, Vec<String>>,
    stats: LearnStats,
    max_rounds: usize,
}

impl LStar {
    pub fn new(alphabet: Vec<String>) -> Result<Self, LearnError> {
        if alphabet.is_empty() {
            return Err(LearnError::EmptyAlphabet);
        }
        let table = ObservationTable {
            prefixes: vec![Vec::new()],
            suffixes: alphabet.iter().map(|a| vec![a.clone()]).collect(),
            cells: HashMap::new(),
        };
        Ok(LStar { alphabet, table, cache: HashMap::new(), stats: LearnStats::default(), max_rounds: 50 })
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> Self {
        self.max_rounds = rounds;
        self
    }

    pub fn table(&self) -> &ObservationTable {
        &self.table
    }

    pub fn stats(&self) -> LearnStats {
        self.stats
    }

    fn query(&mut self, sul: &mut dyn Sul, word: &[String]) -> Result<Vec<String>, LearnError> {
        if let Some(out) = self.cache.get(word) {
            return Ok(out.clone());
        }
        let out = sul.query(word)?;
        self.stats.membership_queries += 1;
        for k in 0..=word.len() {
            self.cache.entry(word[..k].to_vec()).or_insert_with(|| out[..k].to_vec());
        }
        Ok(out)
    }

    fn fill(&mut self, sul: &mut dyn Sul, prefix: &[String]) -> Result<(), LearnError> {
        for e in 0..self.table.suffixes.len() {
            if self.table.cells.contains_key(&(prefix.to_vec(), e)) {
                continue;
            }
            let mut w = prefix.to_vec();
            w.extend(self.table.suffixes[e].iter().cloned());
            let out = self.query(sul, &w)?;
            self.table.cells.insert((prefix.to_vec(), e), out[prefix.len()..].to_vec());
        }
        Ok(())
    }

    fn extended(&self, s: &[String], a: &str) -> Vec<String> {
        let mut w = s.to_vec();
        w.push(a.to_string());
        w
    }

    fn fill_all(&mut self, sul: &mut dyn Sul) -> Result<(), LearnError> {
        for s in self.table.prefixes.clone() {
            self.fill(sul, &s)?;
            for a in self.alphabet.clone() {
                let sa = self.extended(&s, &a);
                self.fill(sul, &sa)?;
            }
        }
        Ok(())
    }

    /// Fills, closes and makes the table consistent.
    fn stabilize(&mut self, sul: &mut dyn Sul) -> Result<(), LearnError> {
        loop {
            self.fill_all(sul)?;
            if let Some(row) = self.unclosed() {
                self.table.prefixes.push(row);
                continue;
            }
            if let Some(suffix) = self.inconsistency() {
                self.table.suffixes.push(suffix);
                continue;
            }
            return Ok(());
        }
    }

    fn unclosed(&self) -> Option<Vec<String>> {
        let short: Vec<_> = self.table.prefixes.iter().map(|s| self.table.row(s)).collect();
        for s in &self.table.prefixes {
            for a in &self.alphabet {
                let sa = self.extended(s, a);
                if !short.contains(&self.table.row(&sa)) {
                    return Some(sa);
                }
            }
        }
        None
    }

    fn inconsistency(&self) -> Option<Vec<String>> {
        let p = &self.table.prefixes;
        for (i, s1) in p.iter().enumerate() {
            for s2 in &p[i + 1..] {
                if self.table.row(s1) != self.table.row(s2) {
                    continue;
                }
                for a in &self.alphabet {
                    let (r1, r2) = (self.table.row(&self.extended(s1, a)), self.table.row(&self.extended(s2, a)));
                    if let Some(e) = (0..r1.len()).find(|&e| r1[e] != r2[e]) {
                        let mut suffix = vec![a.clone()];
                        suffix.extend(self.table.suffixes[e].iter().cloned());
                        return Some(suffix);
                    }
                }
            }
        }
        None
    }

    /// The hypothesis of a closed, consistent table. States are named
    /// `s0, s1, ...` in order of their first short row.
    pub fn hypothesis(&self) -> MealyMachine {
        let mut reps: Vec<&Vec<String>> = Vec::new();
        for s in &self.table.prefixes {
            if !reps.iter().any(|r| self.table.row(r) == self.table.row(s)) {
                reps.push(s);
            }
        }
        let state_of = |w: &[String]| {
            let row = self.table.row(w);
            reps.iter().position(|r| self.table.row(r) == row).expect("table is closed")
        };
        let mut b = MealyMachine::builder().initial("s0");
        for k in 0..reps.len() {
            b = b.state(&format!("s{k}"));
        }
        for a in &self.alphabet {
            b = b.input(a);
        }
        for (k, r) in reps.iter().enumerate() {
            for (ai, a) in self.alphabet.iter().enumerate() {
                let out = &self.table.cells[&((*r).clone(), ai)][0];
                let to = state_of(&self.extended(r, a));
                b = b.transition(&format!("s{k}"), a, out, &format!("s{to}"));
            }
        }
        b.build().expect("hypothesis is complete and deterministic")
    }

    /// The shortest prefix of `w` on which the SUL and `hyp` disagree.
    fn disagreement(
        &mut self,
        sul: &mut dyn Sul,
        hyp: &MealyMachine,
        w: &[String],
    ) -> Result<Option<Vec<String>>, LearnError> {
        let observed = self.query(sul, w)?;
        let predicted = hyp.run(w).map_err(|_| LearnError::UnknownInput(format!("{w:?}")))?;
        Ok((0..w.len()).find(|&k| observed[k] != predicted[k]).map(|k| w[..=k].to_vec()))
    }

    /// Cuts loops of `hyp` out of a counterexample as long as the SUL still
    /// disagrees, so long random walks do not flood the table with prefixes.
    fn shorten(&mut self, sul: &mut dyn Sul, hyp: &MealyMachine, mut ce: Vec<String>) -> Result<Vec<String>, LearnError> {
        'outer: loop {
            let mut states = vec![hyp.initial()];
            for sym in &ce {
                let q = *states.last().unwrap();
                states.push(hyp.next_state(q, hyp.input_id(sym).expect("counterexample over the alphabet")));
            }
            for i in 0..ce.len() {
                // the furthest return to the same hypothesis state
                if let Some(j) = (i + 1..=ce.len()).rev().find(|&j| states[j] == states[i]) {
                    let mut cand = ce[..i].to_vec();
                    cand.extend_from_slice(&ce[j..]);
                    if let Some(shorter) = self.disagreement(sul, hyp, &cand)? {
                        ce = shorter;
                        continue 'outer;
                    }
                }
            }
            return Ok(ce);
        }
    }

    /// Adds every prefix of `ce` as a short row and re-stabilizes. Fails if
    /// the table does not grow.
    fn add_counterexample(&mut self, sul: &mut dyn Sul, ce: &[String]) -> Result<(), LearnError> {
        let before = (self.table.prefixes.len(), self.table.suffixes.len());
        for k in 1..=ce.len() {
            let p = ce[..k].to_vec();
            if !self.table.prefixes.contains(&p) {
                self.table.prefixes.push(p);
            }
        }
        self.stabilize(sul)?;
        if (self.table.prefixes.len(), self.table.suffixes.len()) == before {
            return Err(LearnError::NoProgress(ce.to_vec()));
        }
        Ok(())
    }

    /// Runs the learning loop until the oracle finds no counterexample or
    /// the round budget is spent.
    pub fn learn(&mut self, sul: &mut dyn Sul, oracle: &mut dyn EquivalenceOracle) -> Result<LearnOutcome, LearnError> {
        self.stabilize(sul)?;
        let start_tests = oracle.queries();
        let mut status = LearnStatus::Unproven;
        while self.stats.equivalence_queries < self.max_rounds {
            self.stats.rounds += 1;
            let hyp = self.hypothesis();
            self.stats.equivalence_queries += 1;
            let ce = oracle.find_counterexample(sul, &hyp)?;
            self.stats.test_queries = oracle.queries() - start_tests;
            match ce {
                None => {
                    status = LearnStatus::Converged;
                    break;
                }
                Some(ce) => {
                    let ce = self.shorten(sul, &hyp, ce)?;
                    self.add_counterexample(sul, &ce)?
                }
            }
        }
        Ok(LearnOutcome { machine: self.hypothesis(), stats: self.stats, status })
    }

    /// One extra round driven by an externally found counterexample, such
    /// as a diverging test replay. Cached answers are dropped first since
    /// the SUL may have changed.
    pub fn refine(&mut self, sul: &mut dyn Sul, ce: &[String]) -> Result<MealyMachine, LearnError> {
        let old = self.hypothesis_if_ready();
        self.cache.clear();
        self.table.cells.clear();
        self.stabilize(sul)?;
        let observed = self.query(sul, ce)?;
        let predicted = old.as_ref().unwrap_or(&self.hypothesis()).run(ce).map_err(|_| {
            LearnError::UnknownInput(ce.iter().find(|i| !self.alphabet.contains(i)).cloned().unwrap_or_default())
        })?;
        let current = self.hypothesis().run(ce).expect("alphabet checked");
        if observed == predicted && observed == current {
            return Err(LearnError::NotACounterexample(ce.to_vec()));
        }
        if observed != current {
            self.add_counterexample(sul, ce)?;
        }
        self.stats.rounds += 1;
        Ok(self.hypothesis())
    }

    fn hypothesis_if_ready(&self) -> Option<MealyMachine> {
        if self.table.cells.is_empty() {
            None
        } else {
            Some(self.hypothesis())
        }
    }
}
