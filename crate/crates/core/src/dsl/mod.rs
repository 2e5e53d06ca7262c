//! Textual specification language.
//!
//! A file holds one package of type declarations: modular, range and
//! enumeration integers, messages built from components with `then` clauses,
//! and refinements of `Payload` components. See `docs/grammar.md` for the
//! grammar.

pub mod ast;
mod elaborate;
mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

pub use ast::{Span, SpecFile};
pub use elaborate::{elaborate, elaborate_all, elaborate_refinement, ElaborationError, ElaborationErrorKind, Model, Package};
pub use parser::parse_spec;
pub use pretty::pretty_print;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
    /// Tokens that would have been accepted at `span`.
    pub expected: Vec<String>,
}

impl SyntaxError {
    pub(crate) fn new(span: Span, message: impl Into<String>) -> Self {
        SyntaxError { span, message: message.into(), expected: Vec::new() }
    }
}

fn expected_suffix(expected: &[String]) -> String {
    match expected {
        [] => String::new(),
        [one] => format!(", expected {one}"),
        many => format!(", expected one of {}", many.join(", ")),
    }
}
