//! Epistemic planning with communication as a planning action.

pub mod belief;
pub mod bench;
pub mod compiler;
pub mod domains;
pub mod epddl;
pub mod execution;
pub mod search;
