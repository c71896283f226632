use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compiler::ClassicalTask;

use super::heuristic::HAdd;
use super::successor::{applicable, apply, initial_state, is_goal, SearchState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Breadth-first; optimal in plan length.
    Bfs,
    /// A* with h_add, which is not admissible, so plans may be suboptimal.
    Astar,
    /// Greedy best-first with h_add.
    #[default]
    Gbfs,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Bfs => "bfs",
            Strategy::Astar => "astar",
            Strategy::Gbfs => "gbfs",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(Strategy::Bfs),
            "astar" | "a*" => Ok(Strategy::Astar),
            "gbfs" => Ok(Strategy::Gbfs),
            other => Err(format!("unknown strategy `{other}` (expected bfs, astar or gbfs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_expansions: u64,
    /// `None` disables the wall-clock limit.
    pub timeout_ms: Option<u64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_expansions: 5_000_000,
            timeout_ms: Some(60_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("no plan exists ({} expansions)", .0.expansions)]
    Unsolvable(SearchStats),
    #[error("search limit reached after {} expansions and {:.0} ms", .0.expansions, .0.elapsed_ms)]
    LimitExceeded(SearchStats),
}

impl SearchError {
    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchError::Unsolvable(s) | SearchError::LimitExceeded(s) => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    /// Index into the task's action list.
    pub action: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub strategy: Strategy,
    pub expansions: u64,
    pub generated: u64,
    pub planning_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub provenance: Provenance,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.label.as_str()).collect()
    }
}

/// Interned states with their best-known parent links.
struct Space {
    states: IndexSet<SearchState>,
    parent: Vec<Option<(u32, u32)>>,
    g: Vec<u32>,
}

impl Space {
    fn new(init: SearchState) -> Self {
        let mut states = IndexSet::new();
        states.insert(init);
        Space {
            states,
            parent: vec![None],
            g: vec![0],
        }
    }

    /// Interns `s`; returns its id and whether it is new.
    fn intern(&mut self, s: SearchState, parent: usize, action: usize) -> (usize, bool) {
        let (id, fresh) = self.states.insert_full(s);
        if fresh {
            self.parent.push(Some((parent as u32, action as u32)));
            self.g.push(self.g[parent] + 1);
        }
        (id, fresh)
    }

    fn plan(&self, t: &ClassicalTask, mut id: usize) -> Vec<PlanStep> {
        let mut steps = Vec::new();
        while let Some((p, a)) = self.parent[id] {
            steps.push(PlanStep {
                action: a as usize,
                label: t.actions[a as usize].label(),
            });
            id = p as usize;
        }
        steps.reverse();
        steps
    }
}

struct Budget {
    start: Instant,
    limits: Limits,
    expansions: u64,
    generated: u64,
}

impl Budget {
    fn exhausted(&self) -> bool {
        if self.expansions >= self.limits.max_expansions {
            return true;
        }
        match self.limits.timeout_ms {
            // the clock is read every 64 expansions
            Some(ms) if self.expansions % 64 == 0 => self.start.elapsed() >= Duration::from_millis(ms),
            _ => false,
        }
    }

    fn stats(&self) -> SearchStats {
        SearchStats {
            expansions: self.expansions,
            generated: self.generated,
            elapsed_ms: self.start.elapsed().as_secs_f64() * 1000.0,
        }
    }

    fn finish(&self, strategy: Strategy, steps: Vec<PlanStep>) -> Plan {
        let stats = self.stats();
        Plan {
            steps,
            provenance: Provenance {
                strategy,
                expansions: stats.expansions,
                generated: stats.generated,
                planning_ms: stats.elapsed_ms,
            },
        }
    }
}

/// Forward search over `t`. Ties break by generation order, which follows
/// action order, so results are deterministic.
pub fn solve(t: &ClassicalTask, strategy: Strategy, limits: Limits) -> Result<Plan, SearchError> {
    let mut budget = Budget {
        start: Instant::now(),
        limits,
        expansions: 0,
        generated: 0,
    };
    let init = initial_state(t);
    if is_goal(&init, t) {
        return Ok(budget.finish(strategy, Vec::new()));
    }
    match strategy {
        Strategy::Bfs => bfs(t, init, &mut budget),
        Strategy::Gbfs => gbfs(t, init, &mut budget),
        Strategy::Astar => astar(t, init, &mut budget),
    }
}

fn bfs(t: &ClassicalTask, init: SearchState, budget: &mut Budget) -> Result<Plan, SearchError> {
    let mut space = Space::new(init);
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        if budget.exhausted() {
            return Err(SearchError::LimitExceeded(budget.stats()));
        }
        budget.expansions += 1;
        let s = space.states[id].clone();
        for (ai, a) in t.actions.iter().enumerate() {
            if !applicable(&s, a) {
                continue;
            }
            budget.generated += 1;
            let (next, fresh) = space.intern(apply(&s, a), id, ai);
            if fresh {
                if is_goal(&space.states[next], t) {
                    return Ok(budget.finish(Strategy::Bfs, space.plan(t, next)));
                }
                queue.push_back(next);
            }
        }
    }
    Err(SearchError::Unsolvable(budget.stats()))
}

fn gbfs(t: &ClassicalTask, init: SearchState, budget: &mut Budget) -> Result<Plan, SearchError> {
    let mut h = HAdd::new(t);
    let Some(h0) = h.eval(&init) else {
        return Err(SearchError::Unsolvable(budget.stats()));
    };
    let mut space = Space::new(init);
    let mut counter = 0u64;
    let mut open = BinaryHeap::from([Reverse((h0, counter, 0usize))]);
    while let Some(Reverse((_, _, id))) = open.pop() {
        if budget.exhausted() {
            return Err(SearchError::LimitExceeded(budget.stats()));
        }
        budget.expansions += 1;
        let s = space.states[id].clone();
        for (ai, a) in t.actions.iter().enumerate() {
            if !applicable(&s, a) {
                continue;
            }
            budget.generated += 1;
            let (next, fresh) = space.intern(apply(&s, a), id, ai);
            if !fresh {
                continue;
            }
            if is_goal(&space.states[next], t) {
                return Ok(budget.finish(Strategy::Gbfs, space.plan(t, next)));
            }
            if let Some(hv) = h.eval(&space.states[next]) {
                counter += 1;
                open.push(Reverse((hv, counter, next)));
            }
        }
    }
    Err(SearchError::Unsolvable(budget.stats()))
}

fn astar(t: &ClassicalTask, init: SearchState, budget: &mut Budget) -> Result<Plan, SearchError> {
    let mut h = HAdd::new(t);
    let Some(h0) = h.eval(&init) else {
        return Err(SearchError::Unsolvable(budget.stats()));
    };
    let mut space = Space::new(init);
    let mut hval = vec![h0];
    let mut counter = 0u64;
    let mut open = BinaryHeap::from([Reverse((h0, counter, 0u32, 0usize))]);
    while let Some(Reverse((_, _, g, id))) = open.pop() {
        if g > space.g[id] {
            continue;
        }
        if is_goal(&space.states[id], t) {
            return Ok(budget.finish(Strategy::Astar, space.plan(t, id)));
        }
        if budget.exhausted() {
            return Err(SearchError::LimitExceeded(budget.stats()));
        }
        budget.expansions += 1;
        let s = space.states[id].clone();
        for (ai, a) in t.actions.iter().enumerate() {
            if !applicable(&s, a) {
                continue;
            }
            budget.generated += 1;
            let ng = g + 1;
            let (next, fresh) = space.intern(apply(&s, a), id, ai);
            if fresh {
                match h.eval(&space.states[next]) {
                    Some(hv) => hval.push(hv),
                    None => {
                        hval.push(u64::MAX);
                        continue;
                    }
                }
            } else if ng < space.g[next] && hval[next] != u64::MAX {
                // cheaper path to a known state: reopen it
                space.g[next] = ng;
                space.parent[next] = Some((id as u32, ai as u32));
            } else {
                continue;
            }
            counter += 1;
            open.push(Reverse((ng as u64 + hval[next], counter, ng, next)));
        }
    }
    Err(SearchError::Unsolvable(budget.stats()))
}
