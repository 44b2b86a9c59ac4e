//! Mealy machines, their DOT representation, and equivalence checking.

mod bisim;
pub mod dot;
mod mealy;

pub use bisim::{bisimilar, bisimilar_on_shared_inputs, synchronous_pairs, Equivalence};
pub use dot::{emit_dot, parse_dot, parse_dot_with};
pub use mealy::{used_outputs, MealyBuilder, MealyMachine, EPSILON, NO_RESPONSE, TAU};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomataError {
    #[error("DOT syntax error on line {line}: {message}")]
    DotSyntax { line: usize, message: String },
    #[error("nondeterministic transition: state `{state}` has several targets for input `{input}`")]
    Nondeterministic { state: String, input: String },
    #[error("no initial state (expected a `__start ->` edge or an `initial=true` node)")]
    MissingInitial,
    #[error("several initial states: {0:?}")]
    MultipleInitial(Vec<String>),
    #[error("machine is not input-complete; missing {} transition(s), first: {:?}", missing.len(), missing.first())]
    Incomplete { missing: Vec<(String, String)> },
    #[error("input `{0}` is not in the alphabet")]
    UnknownInput(String),
    #[error("symbol `{0}` is reserved")]
    ReservedSymbol(String),
    #[error("input alphabets differ (only left: {only_left:?}, only right: {only_right:?})")]
    AlphabetMismatch { only_left: Vec<String>, only_right: Vec<String> },
}
