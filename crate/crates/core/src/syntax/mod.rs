//! Text front end: lexer, parser and elaboration into the typed AST.

mod elab;
mod lexer;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::ast::{Arg, BaseExpr, CoExpr, Program, Span, Type};

pub use elab::{infer_base_type, TypeEnv};
pub use lexer::{is_ident_continue, is_ident_start};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Diagnostic {
    #[error("{pos}: syntax error: expected {expected}, found {found}")]
    Syntax { pos: Span, expected: String, found: String },
    #[error("{pos}: name error: {msg}")]
    Name { pos: Span, msg: String },
    #[error("{pos}: type error: {msg}")]
    Type { pos: Span, msg: String },
}

impl Diagnostic {
    pub fn pos(&self) -> Span {
        match self {
            Diagnostic::Syntax { pos, .. } | Diagnostic::Name { pos, .. } | Diagnostic::Type { pos, .. } => *pos,
        }
    }
}

/// All diagnostics produced for one source text, in source order.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

/// Parses and type checks a whole program.
pub fn parse_program(src: &str) -> Result<Program, Diagnostics> {
    let tokens = lexer::tokenize(src)?;
    let decls = parser::Parser::new(tokens).program()?;
    elab::elaborate(decls)
}

/// Direction taken by `fetch` at a two-slot node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    L,
    R,
}

/// A closed value expression together with its type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClosedExpr {
    Base(BaseExpr),
    Co(CoExpr, String),
}

impl ClosedExpr {
    pub fn ty(&self, prog: &Program) -> Type {
        match self {
            ClosedExpr::Base(b) => Type::Base(infer_base_type(prog, b, &TypeEnv::default()).unwrap_or(crate::ast::BaseType::Nat)),
            ClosedExpr::Co(_, t) => Type::Codata(t.clone()),
        }
    }
}

/// Observation requests accepted by the driver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observation {
    Nth(u64, CoExpr, String),
    Fetch(Vec<Dir>, CoExpr, String),
    Take(u64, CoExpr, String),
    Value(ClosedExpr),
}

/// Parses `nth(N, E)`, `fetch([L,R,..], E)`, `take(N, E)` or a bare closed
/// expression against the declarations of `prog`.
pub fn parse_observation(prog: &Program, src: &str) -> Result<Observation, Diagnostics> {
    let raw = parse_raw_expr(src)?;
    Ok(elab::observation(prog, &raw)?)
}

/// Parses a closed expression (no free variables).
pub fn parse_closed(prog: &Program, src: &str) -> Result<ClosedExpr, Diagnostics> {
    let raw = parse_raw_expr(src)?;
    Ok(elab::closed(prog, &raw, None)?)
}

/// Parses a comma separated argument list for `fun`, checking each argument
/// against the parameter types.
pub fn parse_args(prog: &Program, fun: &str, src: &str) -> Result<Vec<Arg>, Diagnostics> {
    let tokens = lexer::tokenize(src)?;
    let raws = parser::Parser::new(tokens).arg_list()?;
    Ok(elab::closed_args(prog, fun, &raws)?)
}

fn parse_raw_expr(src: &str) -> Result<parser::Raw, Diagnostic> {
    let tokens = lexer::tokenize(src)?;
    parser::Parser::new(tokens).single_expr()
}
