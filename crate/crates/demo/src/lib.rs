//! Browser bindings: annotate and draw a model, generate Rebeca, check
//! properties. Every entry point takes a model as DOT text or a fixture
//! name and a proposition map as text.

use wasm_bindgen::prelude::*;

use mealycheck::actorgen::{apply_timeout_mutation, build_ir, emit_rebeca, MutationConfig};
use mealycheck::automata::{emit_dot, parse_dot};
use mealycheck::cpm::{annotate, emit_annotated_dot, expand_tau, parse_cpm, AnnotatedMachine};
use mealycheck::fixtures;
use mealycheck::ltl::{check_all, kripke_from_annotated, load_properties, report_text, ReportLine};
use mealycheck::{Cpm, MealyMachine};

fn model(text: &str) -> Result<MealyMachine, String> {
    match fixtures::by_name(text.trim()) {
        Some(f) => Ok(f.machine),
        None => parse_dot(text).map_err(|e| format!("model: {e}")),
    }
}

fn expanded(model_text: &str, cpm_text: &str) -> Result<(AnnotatedMachine, Cpm), String> {
    let m = model(model_text)?;
    let cpm = parse_cpm(cpm_text).map_err(|e| format!("map: {e}"))?;
    let a = expand_tau(&annotate(&m, &cpm), &cpm);
    Ok((a, cpm))
}

/// `{ dot, nodes: [{name, labels, internal}], edges: [{from, to, label}] }`
pub fn graph_json(model_text: &str, cpm_text: &str) -> Result<String, String> {
    let (a, _) = expanded(model_text, cpm_text)?;
    let k = kripke_from_annotated(&a);
    let nodes: Vec<_> = (0..k.num_states())
        .map(|s| serde_json::json!({ "name": k.names[s], "labels": k.labels[s], "internal": k.internal[s] }))
        .collect();
    let edges: Vec<_> = a
        .expanded_edges()
        .into_iter()
        .map(|(f, t, i, o)| serde_json::json!({ "from": f, "to": t, "label": format!("{i} / {o}") }))
        .collect();
    let g = serde_json::json!({ "dot": emit_annotated_dot(&a), "initial": k.initial, "nodes": nodes, "edges": edges });
    Ok(g.to_string())
}

/// Rebeca text; a probability in (0, 1) adds the timeout mutation.
pub fn rebeca(model_text: &str, cpm_text: &str, timeout_probability: f64) -> Result<String, String> {
    let (a, cpm) = expanded(model_text, cpm_text)?;
    let ir = build_ir(&a, &cpm).map_err(|e| e.to_string())?;
    let cfg = MutationConfig { timeout_enabled: timeout_probability > 0.0, timeout_probability };
    Ok(emit_rebeca(&apply_timeout_mutation(&ir, &cfg).map_err(|e| e.to_string())?))
}

/// `{ text, results: [report lines] }`
pub fn check_json(model_text: &str, cpm_text: &str, properties: &str) -> Result<String, String> {
    let (a, cpm) = expanded(model_text, cpm_text)?;
    let props = load_properties(properties, &cpm).map_err(|e| format!("properties: {e}"))?;
    let k = kripke_from_annotated(&a);
    let results = check_all(&k, &props).map_err(|e| e.to_string())?;
    let lines: Vec<_> = results.iter().map(|r| ReportLine::from_result(&k, r)).collect();
    Ok(serde_json::json!({ "text": report_text(&k, &results), "results": lines }).to_string())
}

#[wasm_bindgen]
pub fn annotate_graph(model_text: &str, cpm_text: &str) -> Result<String, JsValue> {
    graph_json(model_text, cpm_text).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn generate_rebeca(model_text: &str, cpm_text: &str, timeout_probability: f64) -> Result<String, JsValue> {
    rebeca(model_text, cpm_text, timeout_probability).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn check_properties(model_text: &str, cpm_text: &str, properties: &str) -> Result<String, JsValue> {
    check_json(model_text, cpm_text, properties).map_err(|e| JsValue::from_str(&e))
}

/// `[model dot, map, properties]` for a built-in fixture.
#[wasm_bindgen]
pub fn fixture(name: &str) -> Result<Vec<String>, JsValue> {
    let f = fixtures::by_name(name).ok_or_else(|| JsValue::from_str("unknown fixture"))?;
    let (cpm, props) = match name {
        "example" => (fixtures::EXAMPLE_CPM, "P: G(omega2set -> !p)\n"),
        "emrtd" => (fixtures::EMRTD_CPM, fixtures::EMRTD_PROPERTIES),
        _ => (fixtures::UDS_CPM, fixtures::GENERIC_PROPERTIES),
    };
    Ok(vec![emit_dot(&f.machine), cpm.to_string(), props.to_string()])
}
