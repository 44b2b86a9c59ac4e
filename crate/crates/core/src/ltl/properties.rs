use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ast::Formula;
use super::check::{check, Verdict};
use super::{parse_ltl, Kripke, LtlError};
use crate::cpm::Cpm;

/// The generic security properties and the eMRTD-specific extras as
/// `(name, formula)`.
pub const LIBRARY: &[(&str, &str)] = &[
    ("P1", "G((!AUTH && PROT) -> !ACCESSOK)"),
    ("P2", "G(PROT -> !UREADOK)"),
    ("P3", "G((PRIV -> AUTH) && ((!PRIV && CRIT) -> !ACCESSOK))"),
    ("P4", "G(!INVKEYOK)"),
    ("SecureRead", "G(!(SREADOK && !(DF && AUTH && EF)))"),
    ("PlainRead", "G(!(UREADOK && (!EF || DF)))"),
    ("SecureReadFollowsSecureSelect", "((!SREADOK) U SSELEFOK) || G(!SREADOK)"),
];

/// Names of the four generic properties.
pub const GENERIC: &[&str] = &["P1", "P2", "P3", "P4"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub template: Formula,
    /// The template with undeclared propositions replaced by `false`.
    pub formula: Formula,
    pub substituted_false: BTreeSet<String>,
}

/// Instantiates `template` against `cpm`.
pub fn instantiate(name: &str, template: Formula, cpm: &Cpm) -> Property {
    let substituted_false: BTreeSet<String> =
        template.atoms().into_iter().filter(|p| !cpm.declares(p)).collect();
    let formula = template.substitute_false(&|p: &str| substituted_false.contains(p));
    Property { name: name.to_string(), template, formula, substituted_false }
}

/// Every library property instantiated against `cpm`.
pub fn property_library(cpm: &Cpm) -> Vec<Property> {
    LIBRARY
        .iter()
        .map(|(name, text)| instantiate(name, parse_ltl(text).expect("library formulas parse"), cpm))
        .collect()
}

/// Parses a property file: `name: formula` lines with `#` comments.
pub fn parse_property_file(text: &str) -> Result<Vec<(String, Formula)>, LtlError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (name, formula) = line.split_once(':').ok_or_else(|| LtlError::PropertyFile {
            line: n + 1,
            message: "expected `name: formula`".into(),
        })?;
        let formula = parse_ltl(formula).map_err(|e| LtlError::PropertyFile {
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push((name.trim().to_string(), formula));
    }
    Ok(out)
}

/// Parses a property file and instantiates every entry against `cpm`.
pub fn load_properties(text: &str, cpm: &Cpm) -> Result<Vec<Property>, LtlError> {
    Ok(parse_property_file(text)?.into_iter().map(|(n, f)| instantiate(&n, f, cpm)).collect())
}

/// Whether the antecedent of a `G(φ -> ψ)` conjunct can ever be challenged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vacuity {
    pub antecedent: String,
    pub consequent: String,
    /// φ holds in some reachable state.
    pub antecedent_satisfiable: bool,
    /// φ holds together with every proposition of ψ in some reachable state.
    pub cooccurs: bool,
}

impl Vacuity {
    pub fn vacuous(&self) -> bool {
        !self.antecedent_satisfiable || !self.cooccurs
    }
}

fn implications(f: &Formula, out: &mut Vec<(Formula, Formula)>) {
    match f {
        Formula::And(a, b) => {
            implications(a, out);
            implications(b, out);
        }
        Formula::Implies(a, b) => out.push(((**a).clone(), (**b).clone())),
        _ => {}
    }
}

/// One entry per implication directly under a top-level `G`.
pub fn vacuity(k: &Kripke, f: &Formula) -> Vec<Vacuity> {
    let Formula::Globally(body) = f else {
        return Vec::new();
    };
    let mut imps = Vec::new();
    implications(body, &mut imps);
    let reach = k.reachable();
    imps.into_iter()
        .filter_map(|(phi, psi)| {
            let atoms = psi.atoms();
            let mut sat = false;
            let mut co = false;
            for &s in &reach {
                let l = &k.labels[s];
                if phi.eval_state(l)? {
                    sat = true;
                    co |= atoms.iter().all(|a| l.contains(a));
                }
            }
            Some(Vacuity {
                antecedent: phi.to_string(),
                consequent: psi.to_string(),
                antecedent_satisfiable: sat,
                cooccurs: co,
            })
        })
        .collect()
}

/// One line of a check report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub property: Property,
    pub verdict: Verdict,
    pub vacuity: Vec<Vacuity>,
}

impl PropertyResult {
    pub fn vacuous(&self) -> bool {
        self.verdict.holds() && !self.vacuity.is_empty() && self.vacuity.iter().all(Vacuity::vacuous)
    }
}

/// Checks every property, continuing past violations.
pub fn check_all(k: &Kripke, props: &[Property]) -> Result<Vec<PropertyResult>, LtlError> {
    props
        .iter()
        .map(|p| {
            Ok(PropertyResult {
                verdict: check(k, &p.formula)?,
                vacuity: vacuity(k, &p.formula),
                property: p.clone(),
            })
        })
        .collect()
}
