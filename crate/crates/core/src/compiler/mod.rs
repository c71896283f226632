//! Grounding and compilation of epistemic tasks to classical planning tasks
//! with conditional effects, one classical fluent per RML.

mod enumerate;
mod ground;
mod task;

use thiserror::Error;

use crate::belief::{BeliefError, Rml};
use crate::epddl::Diagnostic;

pub use enumerate::{enumerate_rmls, enumerated_count};
pub use ground::{ground, ground_fluents, ConditionalEffect, GroundAction};
pub use task::{
    add_turn_constraint, compile, compile_ground, prune_unreachable, ClassicalAction, ClassicalEffect, ClassicalTask,
    CompileOptions, FluentTable, TASK_SCHEMA,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error("the domain/problem pair has {} validation diagnostics, first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
    #[error("no objects of type `{0}`")]
    EmptyUniverse(String),
    #[error("depth bound {0} exceeds the maximum of 3")]
    DepthTooLarge(usize),
    #[error("literal {0} is outside the enumerated fluent table (depth overflow)")]
    OutsideTable(Rml),
    #[error("action {action} adds both {first} and {second}")]
    ConflictingEffect { action: String, first: Rml, second: Rml },
    #[error("initial state: {0}")]
    InitConflict(BeliefError),
    #[error("action {0} has no agent-typed argument to attribute a turn to")]
    NoActor(String),
    #[error("the task already has a `turn` fluent")]
    TurnFluentClash,
}
