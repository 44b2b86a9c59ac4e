use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use super::AutomataError;

/// Reserved input symbol for the empty-input edge leaving an internal state.
pub const EPSILON: &str = "__eps";
/// Reserved output symbol on the edge entering an internal state.
pub const TAU: &str = "__tau";
/// Output used when completing a partial machine with self-loops.
pub const NO_RESPONSE: &str = "no_response";

/// A deterministic, input-complete Mealy machine.
///
/// States, inputs and outputs are opaque string tokens kept in insertion
/// order; transitions are stored densely as `(next, output)` index pairs.
#[derive(Clone, PartialEq, Eq)]
pub struct MealyMachine {
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    initial: usize,
    // transitions[state][input] = (next, output)
    transitions: Vec<Vec<(usize, usize)>>,
    state_index: HashMap<String, usize>,
    input_index: HashMap<String, usize>,
    output_index: HashMap<String, usize>,
}

impl fmt::Debug for MealyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MealyMachine")
            .field("states", &self.states)
            .field("inputs", &self.inputs)
            .field("initial", &self.states[self.initial])
            .finish_non_exhaustive()
    }
}

impl MealyMachine {
    pub fn builder() -> MealyBuilder {
        MealyBuilder::default()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn initial_name(&self) -> &str {
        &self.states[self.initial]
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn input_name(&self, input: usize) -> &str {
        &self.inputs[input]
    }

    pub fn output_name(&self, output: usize) -> &str {
        &self.outputs[output]
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.state_index.get(name).copied()
    }

    pub fn input_id(&self, name: &str) -> Option<usize> {
        self.input_index.get(name).copied()
    }

    pub fn output_id(&self, name: &str) -> Option<usize> {
        self.output_index.get(name).copied()
    }

    /// `(next state, output)` for a state and input index.
    pub fn step(&self, state: usize, input: usize) -> (usize, usize) {
        self.transitions[state][input]
    }

    pub fn next_state(&self, state: usize, input: usize) -> usize {
        self.transitions[state][input].0
    }

    pub fn output(&self, state: usize, input: usize) -> &str {
        &self.outputs[self.transitions[state][input].1]
    }

    /// Iterates `(source, input, target, output)` in state-major order.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        self.transitions.iter().enumerate().flat_map(|(q, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, &(next, out))| (q, i, next, out))
        })
    }

    /// Runs an input word from the initial state and returns the output word.
    pub fn run<S: AsRef<str>>(&self, word: &[S]) -> Result<Vec<String>, AutomataError> {
        let mut state = self.initial;
        let mut out = Vec::with_capacity(word.len());
        for sym in word {
            let sym = sym.as_ref();
            let input = self
                .input_id(sym)
                .ok_or_else(|| AutomataError::UnknownInput(sym.to_string()))?;
            let (next, o) = self.step(state, input);
            out.push(self.outputs[o].clone());
            state = next;
        }
        Ok(out)
    }

    /// State reached after an input word, if all symbols are known.
    pub fn state_after<S: AsRef<str>>(&self, word: &[S]) -> Option<usize> {
        let mut state = self.initial;
        for sym in word {
            state = self.next_state(state, self.input_id(sym.as_ref())?);
        }
        Some(state)
    }

    /// Restriction to the states reachable from the initial state.
    ///
    /// State order is preserved; outputs no longer produced are dropped.
    pub fn reachable(&self) -> MealyMachine {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for &(next, _) in &self.transitions[q] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            return self.clone();
        }
        let mut b = MealyBuilder::default();
        for input in &self.inputs {
            b = b.input(input);
        }
        for (q, _) in seen.iter().enumerate().filter(|(_, &s)| s) {
            b = b.state(&self.states[q]);
        }
        b = b.initial(&self.states[self.initial]);
        for (q, i, next, o) in self.transitions() {
            if seen[q] {
                b = b.transition(&self.states[q], &self.inputs[i], &self.outputs[o], &self.states[next]);
            }
        }
        b.build().expect("restriction of a valid machine is valid")
    }

    /// Renames states to `prefix0, prefix1, ...` keeping order.
    pub fn with_state_names(&self, names: &[String]) -> MealyMachine {
        assert_eq!(names.len(), self.states.len());
        let mut m = self.clone();
        m.states = names.to_vec();
        m.state_index = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        m
    }
}

/// Incremental constructor for [`MealyMachine`].
#[derive(Debug, Default, Clone)]
pub struct MealyBuilder {
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    initial: Option<String>,
    edges: Vec<(String, String, String, String)>,
    complete_with_no_response: bool,
}

impl MealyBuilder {
    /// Declares a state (keeps first-seen order).
    pub fn state(mut self, name: &str) -> Self {
        if !self.states.iter().any(|s| s == name) {
            self.states.push(name.to_string());
        }
        self
    }

    pub fn input(mut self, name: &str) -> Self {
        if !self.inputs.iter().any(|s| s == name) {
            self.inputs.push(name.to_string());
        }
        self
    }

    pub fn output(mut self, name: &str) -> Self {
        if !self.outputs.iter().any(|s| s == name) {
            self.outputs.push(name.to_string());
        }
        self
    }

    pub fn initial(mut self, name: &str) -> Self {
        self.initial = Some(name.to_string());
        self
    }

    pub fn transition(self, from: &str, input: &str, output: &str, to: &str) -> Self {
        let mut b = self.state(from).state(to).input(input).output(output);
        b.edges
            .push((from.to_string(), input.to_string(), output.to_string(), to.to_string()));
        b
    }

    /// Missing transitions become self-loops emitting [`NO_RESPONSE`]
    /// instead of an incompleteness error.
    pub fn complete_with_self_loops(mut self, yes: bool) -> Self {
        self.complete_with_no_response = yes;
        self
    }

    pub fn build(mut self) -> Result<MealyMachine, AutomataError> {
        let initial_name = match &self.initial {
            Some(n) => n.clone(),
            None => return Err(AutomataError::MissingInitial),
        };
        if !self.states.iter().any(|s| *s == initial_name) {
            self.states.insert(0, initial_name.clone());
        }
        if self.inputs.iter().any(|i| i == EPSILON) {
            return Err(AutomataError::ReservedSymbol(EPSILON.to_string()));
        }
        let state_index: HashMap<String, usize> =
            self.states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let input_index: HashMap<String, usize> =
            self.inputs.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut table: Vec<Vec<Option<(usize, String)>>> =
            vec![vec![None; self.inputs.len()]; self.states.len()];
        for (from, input, output, to) in &self.edges {
            let q = state_index[from];
            let i = input_index[input];
            let slot = &mut table[q][i];
            match slot {
                Some((next, out)) if *next == state_index[to] && out == output => {}
                Some(_) => {
                    return Err(AutomataError::Nondeterministic {
                        state: from.clone(),
                        input: input.clone(),
                    })
                }
                None => *slot = Some((state_index[to], output.clone())),
            }
        }
        let mut missing = Vec::new();
        for (q, row) in table.iter_mut().enumerate() {
            for (i, slot) in row.iter_mut().enumerate() {
                if slot.is_none() {
                    if self.complete_with_no_response {
                        *slot = Some((q, NO_RESPONSE.to_string()));
                    } else {
                        missing.push((self.states[q].clone(), self.inputs[i].clone()));
                    }
                }
            }
        }
        if !missing.is_empty() {
            return Err(AutomataError::Incomplete { missing });
        }
        if self.complete_with_no_response
            && table.iter().flatten().flatten().any(|(_, o)| o == NO_RESPONSE)
            && !self.outputs.iter().any(|o| o == NO_RESPONSE)
        {
            self.outputs.push(NO_RESPONSE.to_string());
        }
        let output_index: HashMap<String, usize> =
            self.outputs.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let transitions = table
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|slot| {
                        let (next, out) = slot.expect("completed above");
                        (next, output_index[&out])
                    })
                    .collect()
            })
            .collect();
        Ok(MealyMachine {
            initial: state_index[&initial_name],
            states: self.states,
            inputs: self.inputs,
            outputs: self.outputs,
            transitions,
            state_index,
            input_index,
            output_index,
        })
    }
}

/// Output symbols actually produced by some transition.
pub fn used_outputs(m: &MealyMachine) -> BTreeSet<&str> {
    m.transitions().map(|(_, _, _, o)| m.output_name(o)).collect()
}
