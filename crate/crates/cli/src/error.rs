use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Automata(#[from] mealycheck::AutomataError),
    #[error(transparent)]
    Cpm(#[from] mealycheck::cpm::CpmError),
    #[error(transparent)]
    ActorGen(#[from] mealycheck::actorgen::ActorGenError),
    #[error(transparent)]
    Statespace(#[from] mealycheck::statespace::StatespaceError),
    #[error(transparent)]
    Ltl(#[from] mealycheck::ltl::LtlError),
    #[error(transparent)]
    Learn(#[from] mealycheck::learning::LearnError),
    #[error(transparent)]
    Testkit(#[from] mealycheck::testkit::TestkitError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            _ => 1,
        }
    }

    /// Tags a parse error with the file it came from.
    pub fn input(path: &str, e: impl std::fmt::Display) -> Self {
        CliError::Input { path: path.to_string(), message: e.to_string() }
    }
}
