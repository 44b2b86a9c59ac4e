use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Kripke, LtlError, PropertyResult, Vacuity, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoJson {
    pub stem: Vec<String>,
    #[serde(rename = "loop")]
    pub cycle: Vec<String>,
    /// `(input, output)` of every edge along stem and loop, ending with the
    /// edge that closes the loop.
    pub edges: Vec<(String, String)>,
}

/// One JSON line of a check report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportLine {
    pub name: String,
    pub formula: String,
    pub verdict: String,
    pub vacuous: bool,
    pub substituted_false: Vec<String>,
    pub vacuity: Vec<Vacuity>,
    pub lasso: Option<LassoJson>,
}

impl ReportLine {
    pub fn from_result(k: &Kripke, r: &PropertyResult) -> Self {
        let lasso = r.verdict.lasso().map(|l| {
            let (stem, cycle) = l.names(k);
            let seq: Vec<usize> = l.states().chain(std::iter::once(l.cycle[0])).collect();
            let edges = seq
                .windows(2)
                .map(|w| {
                    let e = k.edge(w[0], w[1]).expect("lasso follows edges");
                    (e.input.clone(), e.output.clone())
                })
                .collect();
            LassoJson { stem, cycle, edges }
        });
        ReportLine {
            name: r.property.name.clone(),
            formula: r.property.formula.to_string(),
            verdict: if r.verdict.holds() { "HOLDS" } else { "VIOLATED" }.to_string(),
            vacuous: r.vacuous(),
            substituted_false: r.property.substituted_false.iter().cloned().collect(),
            vacuity: r.vacuity.clone(),
            lasso,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == "HOLDS"
    }
}

pub fn report_json_lines(k: &Kripke, results: &[PropertyResult]) -> String {
    results
        .iter()
        .map(|r| serde_json::to_string(&ReportLine::from_result(k, r)).expect("serializable") + "\n")
        .collect()
}

pub fn parse_report_line(line: &str) -> Result<ReportLine, LtlError> {
    serde_json::from_str(line).map_err(|e| LtlError::Report(e.to_string()))
}

/// Human-readable report, one block per property.
pub fn report_text(k: &Kripke, results: &[PropertyResult]) -> String {
    let mut s = String::new();
    for r in results {
        let verdict = match &r.verdict {
            Verdict::Holds if r.vacuous() => "HOLDS (vacuously)",
            Verdict::Holds => "HOLDS",
            Verdict::Violated(_) => "VIOLATED",
        };
        let _ = writeln!(s, "{}: {verdict}", r.property.name);
        let _ = writeln!(s, "  formula: {}", r.property.formula);
        if !r.property.substituted_false.is_empty() {
            let names: Vec<&str> = r.property.substituted_false.iter().map(String::as_str).collect();
            let _ = writeln!(s, "  undeclared, read as false: {}", names.join(", "));
        }
        for v in &r.vacuity {
            if v.vacuous() {
                let why = if v.antecedent_satisfiable {
                    format!("{} never holds together with {}", v.antecedent, v.consequent)
                } else {
                    format!("{} never holds", v.antecedent)
                };
                let _ = writeln!(s, "  vacuity: {why}");
            }
        }
        if let Some(l) = r.verdict.lasso() {
            let (stem, cycle) = l.names(k);
            let _ = writeln!(s, "  stem: {}", stem.join(" "));
            let _ = writeln!(s, "  loop: {}", cycle.join(" "));
        }
    }
    s
}
