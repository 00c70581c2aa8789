//! Analysis and transformation of corecursive function definitions.
//!
//! The pipeline is: [`syntax::parse_program`] produces a typed [`ast::Program`];
//! [`guard`] classifies each definition; [`transform`] splits transformable
//! definitions into an inductive and a coinductive component; [`eval`] runs
//! both the original and the transformed semantics under fuel; [`emit`]
//! renders the result as a proof-assistant script and a JSON report.

pub mod analysis;
pub mod ast;
pub mod emit;
pub mod eval;
pub mod guard;
pub mod pretty;
pub mod syntax;
pub mod transform;
