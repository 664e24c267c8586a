//! Acyclic logic programs: syntax, parsing, grounding and stable models.
//!
//! An acyclic program has exactly one stable model for any set of added
//! facts. It is computed here by evaluating atoms bottom-up along a level
//! mapping, which also witnesses acyclicity.

mod eval;
mod parse;
mod syntax;

pub use eval::{check_acyclic, ground, ground_self, stable_model, Evaluator};
pub use parse::{parse_literals, parse_program, ParseError, ParseErrorKind};
pub(crate) use parse::{Parser, Tok};
pub use syntax::{
    Atom, Clause, GroundProgram, Interpretation, LevelMapping, Literal, Program, Term,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("program is cyclic: {}", display_cycle(.cycle))]
    Cyclic { cycle: Vec<Atom> },
}

fn display_cycle(cycle: &[Atom]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(ToString::to_string).collect();
    if let Some(first) = parts.first().cloned() {
        parts.push(first);
    }
    parts.join(" -> ")
}
