//! The epistemic PDDL dialect: `.epddl` domains and `.eprob` problems.
//!
//! Belief is written `[agent]φ` in front of a literal, negation `(not φ)`.
//! See `docs/format.md` for the grammar.

mod ast;
mod parser;
mod reader;
mod render;
mod validate;

use thiserror::Error;

use crate::belief::Rml;

pub use ast::*;
pub use parser::{parse_domain, parse_problem};
pub use render::{render_domain, render_problem};
pub use validate::{validate, Diagnostic, DiagnosticCategory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EpddlError {
    #[error("{pos}: {message}")]
    Lexical { pos: Pos, message: String },
    #[error("{pos}: unexpected `)`")]
    UnexpectedClose { pos: Pos },
    #[error("{open}: `(` is never closed")]
    Unclosed { open: Pos },
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: undeclared type `{name}`")]
    UndeclaredType { pos: Pos, name: String },
    #[error("{pos}: undeclared predicate `{name}`")]
    UndeclaredPredicate { pos: Pos, name: String },
    #[error("{pos}: `{predicate}` takes {expected} arguments, found {found}")]
    Arity {
        pos: Pos,
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("{pos}: unsupported :derive-condition `{value}` (only `always` is accepted)")]
    DeriveCondition { pos: Pos, value: String },
    #[error("{pos}: duplicate action `{name}`")]
    DuplicateAction { pos: Pos, name: String },
    #[error("{pos}: init literal {second} conflicts with {first}")]
    InitConflict { pos: Pos, first: Rml, second: Rml },
}

impl EpddlError {
    pub fn pos(&self) -> Pos {
        match self {
            EpddlError::Lexical { pos, .. }
            | EpddlError::UnexpectedClose { pos }
            | EpddlError::Syntax { pos, .. }
            | EpddlError::UndeclaredType { pos, .. }
            | EpddlError::UndeclaredPredicate { pos, .. }
            | EpddlError::Arity { pos, .. }
            | EpddlError::DeriveCondition { pos, .. }
            | EpddlError::DuplicateAction { pos, .. }
            | EpddlError::InitConflict { pos, .. } => *pos,
            EpddlError::Unclosed { open } => *open,
        }
    }
}
