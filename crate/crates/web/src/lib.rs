//! Browser bindings: classify, evaluate and emit a program held in a text box.
//!
//! Every export takes the whole source and returns text; errors come back
//! as rejected promises carrying the diagnostic.

use corec_core::analysis::analyze;
use corec_core::emit::{emit_program, emit_report};
use corec_core::eval::{Machine, Sem};
use corec_core::syntax::{parse_observation, parse_program};
use wasm_bindgen::prelude::*;

/// Per-definition verdicts and generated names as pretty JSON.
#[wasm_bindgen]
pub fn check(src: &str) -> Result<String, String> {
    let prog = parse_program(src).map_err(|d| d.to_string())?;
    Ok(emit_report(&prog, &analyze(&prog)))
}

/// Evaluates `nth(..)`, `fetch(..)`, `take(..)` or a plain expression.
#[wasm_bindgen]
pub fn run(src: &str, expr: &str, fuel: u32) -> Result<String, String> {
    let prog = parse_program(src).map_err(|d| d.to_string())?;
    let analysis = analyze(&prog);
    let obs = parse_observation(&prog, expr).map_err(|d| d.to_string())?;
    Machine::new(&prog, &analysis, u64::from(fuel.max(1))).observe(&obs, Sem::Transformed, 10).map_err(|e| e.to_string())
}

/// The proof-assistant script for the whole program.
#[wasm_bindgen]
pub fn emit(src: &str) -> Result<String, String> {
    let prog = parse_program(src).map_err(|d| d.to_string())?;
    Ok(emit_program(&prog, &analyze(&prog)))
}
