use std::collections::BTreeSet;

use serde::Serialize;

use crate::belief::Rml;
use crate::compiler::{ClassicalAction, ClassicalTask};

use super::solve::Plan;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepFailure {
    pub index: usize,
    pub label: String,
    /// Precondition literals absent at that step (empty for an unknown label).
    pub missing: Vec<Rml>,
    pub unknown_action: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub steps_executed: usize,
    pub failure: Option<StepFailure>,
    pub goal_satisfied: bool,
    pub unsatisfied_goals: Vec<Rml>,
}

fn missing(state: &BTreeSet<usize>, a: &ClassicalAction) -> Vec<usize> {
    a.pre.iter().copied().filter(|i| !state.contains(i)).collect()
}

/// Replays `plan` on `t` by action label with a set-based interpreter.
/// A label matching several compiled variants uses the first applicable one.
pub fn validate_plan(t: &ClassicalTask, plan: &Plan) -> ValidationReport {
    let mut state: BTreeSet<usize> = t.init.iter().copied().collect();
    let mut failure = None;
    let mut executed = 0;
    for (index, step) in plan.steps.iter().enumerate() {
        let candidates: Vec<&ClassicalAction> = t.actions.iter().filter(|a| a.label() == step.label).collect();
        let Some(first) = candidates.first() else {
            failure = Some(StepFailure {
                index,
                label: step.label.clone(),
                missing: Vec::new(),
                unknown_action: true,
            });
            break;
        };
        let Some(action) = candidates.iter().find(|a| missing(&state, a).is_empty()) else {
            failure = Some(StepFailure {
                index,
                label: step.label.clone(),
                missing: missing(&state, first)
                    .into_iter()
                    .map(|i| t.fluents.literal(i).clone())
                    .collect(),
                unknown_action: false,
            });
            break;
        };
        let before = state.clone();
        for e in &action.effects {
            if e.guard.iter().all(|g| before.contains(g)) {
                for d in &e.dels {
                    state.remove(d);
                }
                state.extend(e.adds.iter().copied());
            }
        }
        executed += 1;
    }
    let unsatisfied_goals: Vec<Rml> = if failure.is_none() {
        t.goal
            .iter()
            .filter(|g| !state.contains(g))
            .map(|&g| t.fluents.literal(g).clone())
            .collect()
    } else {
        Vec::new()
    };
    let goal_satisfied = failure.is_none() && unsatisfied_goals.is_empty();
    ValidationReport {
        valid: goal_satisfied,
        steps_executed: executed,
        failure,
        goal_satisfied,
        unsatisfied_goals,
    }
}
