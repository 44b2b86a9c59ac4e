use std::collections::{BTreeMap, HashMap};

use super::{LearnError, Sul};
use crate::cpm::glob_match;

/// Abstract symbol for outputs carrying fresh random values.
pub const NONCE: &str = "NONCE";

/// Translation between the learner's abstract symbols and a SUL's concrete
/// ones. Inputs without an explicit mapping pass through unchanged, as do
/// outputs outside the declared nondeterministic classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Mapper {
    pub inputs: BTreeMap<String, String>,
    /// `(glob over concrete outputs, abstract symbol)`, first match wins.
    pub nondeterministic: Vec<(String, String)>,
}

impl Mapper {
    pub fn concretize_input<'a>(&'a self, input: &'a str) -> &'a str {
        self.inputs.get(input).map(String::as_str).unwrap_or(input)
    }

    pub fn abstract_output<'a>(&'a self, output: &'a str) -> &'a str {
        self.nondeterministic
            .iter()
            .find(|(pat, _)| glob_match(pat, output))
            .map(|(_, abs)| abs.as_str())
            .unwrap_or(output)
    }

    /// Whether `output` falls into a declared nondeterministic class.
    pub fn is_nondeterministic(&self, output: &str) -> bool {
        self.nondeterministic.iter().any(|(pat, _)| glob_match(pat, output))
    }
}

/// Maps every `CHAL_<hex>` challenge to [`NONCE`].
pub fn canonicalize_nonce_mapper() -> Mapper {
    Mapper { inputs: BTreeMap::new(), nondeterministic: vec![("CHAL_*".into(), NONCE.into())] }
}

/// A SUL seen through a mapper. Answers are remembered per input prefix so
/// an output that changes between identical queries is reported instead of
/// silently corrupting the learner's table.
pub struct MappedSul<S> {
    raw: S,
    mapper: Mapper,
    prefix: Vec<String>,
    seen: HashMap<Vec<String>, String>,
}

impl<S: Sul> MappedSul<S> {
    pub fn new(raw: S, mapper: Mapper) -> Self {
        MappedSul { raw, mapper, prefix: Vec::new(), seen: HashMap::new() }
    }

    pub fn mapper(&self) -> &Mapper {
        &self.mapper
    }

    pub fn into_inner(self) -> S {
        self.raw
    }
}

impl<S: Sul> Sul for MappedSul<S> {
    fn reset(&mut self) {
        self.prefix.clear();
        self.raw.reset();
    }

    fn step(&mut self, input: &str) -> Result<String, LearnError> {
        let concrete = self.raw.step(self.mapper.concretize_input(input))?;
        let out = self.mapper.abstract_output(&concrete).to_string();
        self.prefix.push(input.to_string());
        match self.seen.get(&self.prefix) {
            Some(prev) if *prev != out => Err(LearnError::Nondeterministic {
                word: self.prefix.clone(),
                symbol: concrete,
                previous: prev.clone(),
            }),
            Some(_) => Ok(out),
            None => {
                self.seen.insert(self.prefix.clone(), out.clone());
                Ok(out)
            }
        }
    }
}

/// Decorates selected responses of a SUL with a fresh value on every
/// occurrence: output `o` becomes `<o><sep><hex>`.
pub struct NonceSul<S> {
    inner: S,
    decorate: Vec<(String, String, String)>,
    counter: u64,
}

impl<S: Sul> NonceSul<S> {
    /// `decorate` lists `(input, output, separator)` triples.
    pub fn new(inner: S, decorate: Vec<(String, String, String)>) -> Self {
        NonceSul { inner, decorate, counter: 0 }
    }
}

impl<S: Sul> Sul for NonceSul<S> {
    fn reset(&mut self) {
        self.inner.reset();
    }

    fn step(&mut self, input: &str) -> Result<String, LearnError> {
        let out = self.inner.step(input)?;
        match self.decorate.iter().find(|(i, o, _)| i == input && *o == out) {
            Some((_, _, sep)) => {
                // a cheap scrambler; only distinctness matters
                self.counter += 1;
                let v = self.counter.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 48;
                Ok(format!("{out}{sep}{v:04x}"))
            }
            None => Ok(out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::MealyMachine;
    use crate::learning::MachineSul;
    use proptest::prelude::*;

    fn challenge_machine() -> MealyMachine {
        MealyMachine::builder()
            .initial("s0")
            .transition("s0", "GET_CHALLENGE", "CHAL", "s1")
            .transition("s0", "PING", "9000", "s0")
            .transition("s1", "GET_CHALLENGE", "CHAL", "s1")
            .transition("s1", "PING", "6985", "s0")
            .build()
            .unwrap()
    }

    fn word(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn challenges_become_nonce() {
        let raw = NonceSul::new(MachineSul::new(challenge_machine()), vec![("GET_CHALLENGE".into(), "CHAL".into(), "_".into())]);
        let mut raw = raw;
        let a = raw.query(&word(&["GET_CHALLENGE"])).unwrap();
        let b = raw.query(&word(&["GET_CHALLENGE"])).unwrap();
        assert_ne!(a, b);
        assert!(a[0].starts_with("CHAL_"));
        let mut sul = MappedSul::new(raw, canonicalize_nonce_mapper());
        let w = word(&["GET_CHALLENGE", "PING"]);
        assert_eq!(sul.query(&w).unwrap(), word(&[NONCE, "6985"]));
        assert_eq!(sul.query(&w).unwrap(), word(&[NONCE, "6985"]));
    }

    #[test]
    fn passthrough() {
        let m = canonicalize_nonce_mapper();
        assert_eq!(m.abstract_output("9000"), "9000");
        assert_eq!(m.abstract_output("CHAL_1a2b"), NONCE);
        assert_eq!(m.abstract_output("CHAL_9f00"), NONCE);
        assert_eq!(m.concretize_input("PING"), "PING");
    }

    #[test]
    fn input_mapping() {
        let mut m = Mapper::default();
        m.inputs.insert("ping".into(), "PING".into());
        let mut sul = MappedSul::new(MachineSul::new(challenge_machine()), m);
        assert_eq!(sul.query(&word(&["ping"])).unwrap(), word(&["9000"]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// A raw SUL that leaks fresh values on an undeclared output is
        /// caught on the first repeated query.
        #[test]
        fn leaky_sul_is_diagnosed(prefix in proptest::collection::vec(prop_oneof![Just("PING"), Just("GET_CHALLENGE")], 0..5)) {
            let raw = NonceSul::new(MachineSul::new(challenge_machine()), vec![("GET_CHALLENGE".into(), "CHAL".into(), "-".into())]);
            let mut sul = MappedSul::new(raw, canonicalize_nonce_mapper());
            let mut w = word(&prefix);
            w.push("GET_CHALLENGE".into());
            sul.query(&w).unwrap();
            match sul.query(&w) {
                Err(LearnError::Nondeterministic { symbol, .. }) => prop_assert!(symbol.starts_with("CHAL-")),
                other => prop_assert!(false, "expected a diagnostic, got {:?}", other),
            }
        }

        #[test]
        fn wrapped_sul_is_deterministic(w in proptest::collection::vec(prop_oneof![Just("PING"), Just("GET_CHALLENGE")], 0..8)) {
            let raw = NonceSul::new(MachineSul::new(challenge_machine()), vec![("GET_CHALLENGE".into(), "CHAL".into(), "_".into())]);
            let mut sul = MappedSul::new(raw, canonicalize_nonce_mapper());
            let w = word(&w);
            let first = sul.query(&w).unwrap();
            for _ in 0..100 {
                prop_assert_eq!(&sul.query(&w).unwrap(), &first);
            }
        }
    }
}
