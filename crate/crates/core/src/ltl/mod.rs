//! LTL formulas, their Büchi automata, explicit-state checking over Kripke
//! structures with lasso counterexamples, and the security property library.

mod ast;
mod buchi;
mod check;
mod kripke;
mod oracle;
mod properties;
mod report;

pub use ast::{
    and, finally, globally, implies, next, not, or, parse_ltl, prop, release, to_nnf, until, Formula,
};
pub use buchi::{ltl_to_buchi, Buchi, Guard};
pub use check::{check, check_with_limit, Lasso, Verdict, DEFAULT_PRODUCT_LIMIT};
pub use kripke::{emit_kripke_dot, kripke_from_annotated, Kripke, KripkeEdge};
pub use oracle::{bounded_oracle, eval_lasso, OracleVerdict, ORACLE_LIMIT};
pub use properties::{
    check_all, instantiate, load_properties, parse_property_file, property_library, vacuity, Property, PropertyResult,
    Vacuity, GENERIC, LIBRARY,
};
pub use report::{parse_report_line, report_json_lines, report_text, ReportLine};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlError {
    #[error("position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("property file line {line}: {message}")]
    PropertyFile { line: usize, message: String },
    #[error("product exceeds {0} states")]
    TooLarge(usize),
    #[error("lasso enumeration exceeds {0} candidates")]
    BoundExplosion(usize),
    #[error("counterexample failed its own replay")]
    SelfCheck,
    #[error("report: {0}")]
    Report(String),
}

#[cfg(test)]
mod tests;
