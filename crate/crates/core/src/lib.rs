//! Learn Mealy-machine models of black-box protocol implementations,
//! annotate them with security propositions, translate them into a
//! two-actor model, check LTL properties, and turn counterexamples into
//! replayable tests.

pub mod actorgen;
pub mod automata;
pub mod cpm;
pub mod fixtures;
pub mod learning;
pub mod ltl;
pub mod statespace;
pub mod testkit;

pub use automata::{MealyMachine, AutomataError};
pub use cpm::{AnnotatedMachine, Cpm};
