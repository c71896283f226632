use fixedbitset::FixedBitSet;

use crate::compiler::{ClassicalAction, ClassicalTask};

/// A search node's fluent set.
pub type SearchState = FixedBitSet;

pub fn initial_state(t: &ClassicalTask) -> SearchState {
    state_from(t, t.init.iter().copied())
}

pub fn state_from<I: IntoIterator<Item = usize>>(t: &ClassicalTask, indices: I) -> SearchState {
    let mut s = FixedBitSet::with_capacity(t.fluents.len());
    s.extend(indices);
    s
}

fn holds(s: &SearchState, set: &[usize]) -> bool {
    set.iter().all(|&i| s.contains(i))
}

pub fn is_goal(s: &SearchState, t: &ClassicalTask) -> bool {
    holds(s, &t.goal)
}

pub fn applicable(s: &SearchState, a: &ClassicalAction) -> bool {
    holds(s, &a.pre)
}

/// Successor under `a`. Guards read the pre-state; items apply in order,
/// deletes before adds.
pub fn apply(s: &SearchState, a: &ClassicalAction) -> SearchState {
    let mut next = s.clone();
    for e in &a.effects {
        if holds(s, &e.guard) {
            for &i in &e.dels {
                next.set(i, false);
            }
            for &i in &e.adds {
                next.insert(i);
            }
        }
    }
    next
}

/// `(action index, successor)` for every applicable action, in action order.
pub fn successors(s: &SearchState, t: &ClassicalTask) -> Vec<(usize, SearchState)> {
    t.actions
        .iter()
        .enumerate()
        .filter(|(_, a)| applicable(s, a))
        .map(|(i, a)| (i, apply(s, a)))
        .collect()
}
