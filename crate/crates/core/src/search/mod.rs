//! Classical forward search over compiled tasks, and an independent plan checker.

mod heuristic;
mod solve;
mod successor;
mod validate;

pub use heuristic::{h_add, HAdd};
pub use solve::{solve, Limits, Plan, PlanStep, Provenance, SearchError, SearchStats, Strategy};
pub use successor::{applicable, apply, initial_state, is_goal, state_from, successors, SearchState};
pub use validate::{validate_plan, StepFailure, ValidationReport};
