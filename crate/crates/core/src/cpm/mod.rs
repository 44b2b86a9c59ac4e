//! Context-based proposition maps: declarative rules saying which
//! input/output pairs make a proposition true, false, or true for a single
//! internal step, and the annotation of Mealy machines they drive.

mod annotate;
mod annotated;
mod glob;

pub use annotate::{annotate, annotate_with_report, expand_tau, AnnotationReport};
pub use annotated::{emit_annotated_dot, parse_annotated_dot, AnnotatedMachine, TauState};
pub use glob::{glob_match, matches, symbol_matches};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: row must have 3 `|`-separated cells, found {found}")]
    MalformedRow { line: usize, found: usize },
    #[error("line {line}: empty cell")]
    EmptyCell { line: usize },
    #[error("line {line}: `{name}` is not a valid proposition name")]
    BadProposition { line: usize, name: String },
    #[error("propositions used both as temporary and as state propositions: {0:?}")]
    NamespaceCollision(Vec<String>),
    #[error(transparent)]
    Automata(#[from] crate::automata::AutomataError),
    #[error("annotated DOT: {0}")]
    AnnotatedDot(String),
}

/// Which list of a [`Cpm`] a condition lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Gains,
    Loses,
    Taus,
}

impl Section {
    pub fn header(self) -> &'static str {
        match self {
            Section::Gains => "[GAINS]",
            Section::Loses => "[LOSES]",
            Section::Taus => "[TAUS]",
        }
    }
}

/// One `⟨props, inputs, outputs⟩` rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub props: BTreeSet<String>,
    pub input_patterns: Vec<String>,
    pub output_patterns: Vec<String>,
}

impl Condition {
    pub fn new<P, I, O>(props: P, inputs: I, outputs: O) -> Self
    where
        P: IntoIterator,
        P::Item: Into<String>,
        I: IntoIterator,
        I::Item: Into<String>,
        O: IntoIterator,
        O::Item: Into<String>,
    {
        Condition {
            props: props.into_iter().map(Into::into).collect(),
            input_patterns: inputs.into_iter().map(Into::into).collect(),
            output_patterns: outputs.into_iter().map(Into::into).collect(),
        }
    }

    pub fn fires(&self, input: &str, output: &str) -> bool {
        matches(&self.input_patterns, input) && matches(&self.output_patterns, output)
    }
}

/// A context-based proposition map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cpm {
    pub gains: Vec<Condition>,
    pub loses: Vec<Condition>,
    pub taus: Vec<Condition>,
}

impl Cpm {
    pub fn is_empty(&self) -> bool {
        self.gains.is_empty() && self.loses.is_empty() && self.taus.is_empty()
    }

    pub fn section(&self, s: Section) -> &[Condition] {
        match s {
            Section::Gains => &self.gains,
            Section::Loses => &self.loses,
            Section::Taus => &self.taus,
        }
    }

    /// Propositions that live on machine states.
    pub fn state_props(&self) -> BTreeSet<String> {
        self.gains.iter().chain(&self.loses).flat_map(|c| c.props.iter().cloned()).collect()
    }

    /// Propositions that only hold on internal states.
    pub fn temp_props(&self) -> BTreeSet<String> {
        self.taus.iter().flat_map(|c| c.props.iter().cloned()).collect()
    }

    pub fn declares(&self, prop: &str) -> bool {
        self.section_of(prop).is_some()
    }

    fn section_of(&self, prop: &str) -> Option<Section> {
        if self.gains.iter().chain(&self.loses).any(|c| c.props.contains(prop)) {
            Some(Section::Gains)
        } else if self.taus.iter().any(|c| c.props.contains(prop)) {
            Some(Section::Taus)
        } else {
            None
        }
    }

    /// Temporary propositions set by an `input / output` pair.
    pub fn temps_for(&self, input: &str, output: &str) -> BTreeSet<String> {
        self.taus
            .iter()
            .filter(|c| c.fires(input, output))
            .flat_map(|c| c.props.iter().cloned())
            .collect()
    }

    fn validate(&self) -> Result<(), CpmError> {
        let state = self.state_props();
        let clash: Vec<String> = self.temp_props().intersection(&state).cloned().collect();
        if clash.is_empty() {
            Ok(())
        } else {
            Err(CpmError::NamespaceCollision(clash))
        }
    }
}

fn valid_prop_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the line-oriented CPM format:
///
/// ```text
/// # comment
/// [GAINS]
/// AUTH | BAC | 9000
/// [LOSES]
/// AUTH, PRIV | EF*, *BIN | 6*
/// [TAUS]
/// UREADOK, READOK | RD_BIN | 9000
/// ```
pub fn parse_cpm(text: &str) -> Result<Cpm, CpmError> {
    let mut cpm = Cpm::default();
    let mut section: Option<Section> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = Some(match content.to_ascii_uppercase().as_str() {
                "[GAINS]" => Section::Gains,
                "[LOSES]" => Section::Loses,
                "[TAUS]" => Section::Taus,
                _ => {
                    return Err(CpmError::Syntax {
                        line,
                        message: format!("unknown section `{content}`"),
                    })
                }
            });
            continue;
        }
        let Some(sec) = section else {
            return Err(CpmError::Syntax { line, message: "row outside of a section".into() });
        };
        let cells: Vec<&str> = content.split('|').collect();
        if cells.len() != 3 {
            return Err(CpmError::MalformedRow { line, found: cells.len() });
        }
        let mut parsed = Vec::with_capacity(3);
        for cell in cells {
            let items: Vec<String> = cell
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if items.is_empty() {
                return Err(CpmError::EmptyCell { line });
            }
            parsed.push(items);
        }
        let outputs = parsed.pop().unwrap();
        let inputs = parsed.pop().unwrap();
        let props = parsed.pop().unwrap();
        if let Some(bad) = props.iter().find(|p| !valid_prop_name(p)) {
            return Err(CpmError::BadProposition { line, name: bad.clone() });
        }
        let cond = Condition::new(props, inputs, outputs);
        match sec {
            Section::Gains => cpm.gains.push(cond),
            Section::Loses => cpm.loses.push(cond),
            Section::Taus => cpm.taus.push(cond),
        }
    }
    cpm.validate()?;
    Ok(cpm)
}

impl fmt::Display for Cpm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in [Section::Gains, Section::Loses, Section::Taus] {
            writeln!(f, "{}", s.header())?;
            for c in self.section(s) {
                let props: Vec<&str> = c.props.iter().map(String::as_str).collect();
                writeln!(
                    f,
                    "{} | {} | {}",
                    props.join(", "),
                    c.input_patterns.join(", "),
                    c.output_patterns.join(", ")
                )?;
            }
        }
        Ok(())
    }
}
