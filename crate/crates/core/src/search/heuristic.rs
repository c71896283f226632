use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::compiler::ClassicalTask;

use super::SearchState;

struct RelaxedOp {
    pre_count: u32,
    adds: Vec<usize>,
}

/// Additive delete-relaxation heuristic with precomputed relaxed operators
/// (one per action effect item, requiring action precondition plus guard)
/// and reusable scratch space.
///
/// Turn tokens are treated as always available. No-ops make every token
/// reachable anyway, and charging for them per subgoal would make an agent's
/// own progress look like a regression whenever it hands the token on.
pub struct HAdd {
    ops: Vec<RelaxedOp>,
    /// Operators whose precondition mentions each fluent.
    watchers: Vec<Vec<usize>>,
    free_ops: Vec<usize>,
    goal: Vec<usize>,
    is_goal: Vec<bool>,
    cost: Vec<u64>,
    remaining: Vec<u32>,
    op_cost: Vec<u64>,
    queue: BinaryHeap<Reverse<(u64, usize)>>,
}

const INF: u64 = u64::MAX;

impl HAdd {
    pub fn new(t: &ClassicalTask) -> Self {
        let n = t.fluents.len();
        let mut ops = Vec::new();
        let mut watchers = vec![Vec::new(); n];
        let mut free_ops = Vec::new();
        let mut turn = vec![false; n];
        for &f in t.turn_fluents.iter().flatten() {
            turn[f] = true;
        }
        for a in &t.actions {
            for e in &a.effects {
                let adds: Vec<usize> = e.adds.iter().copied().filter(|&f| !turn[f]).collect();
                if adds.is_empty() {
                    continue;
                }
                let mut pre: Vec<usize> = a.pre.iter().chain(&e.guard).copied().filter(|&f| !turn[f]).collect();
                pre.sort_unstable();
                pre.dedup();
                let id = ops.len();
                for &f in &pre {
                    watchers[f].push(id);
                }
                if pre.is_empty() {
                    free_ops.push(id);
                }
                ops.push(RelaxedOp {
                    pre_count: pre.len() as u32,
                    adds,
                });
            }
        }
        let m = ops.len();
        let mut is_goal = vec![false; n];
        for &g in &t.goal {
            is_goal[g] = true;
        }
        HAdd {
            ops,
            watchers,
            free_ops,
            goal: t.goal.clone(),
            is_goal,
            cost: vec![INF; n],
            remaining: vec![0; m],
            op_cost: vec![0; m],
            queue: BinaryHeap::new(),
        }
    }

    /// `None` when some goal fluent is relaxed-unreachable.
    pub fn eval(&mut self, s: &SearchState) -> Option<u64> {
        if self.goal.iter().all(|&g| s.contains(g)) {
            return Some(0);
        }
        self.cost.fill(INF);
        self.op_cost.fill(0);
        for (r, op) in self.remaining.iter_mut().zip(&self.ops) {
            *r = op.pre_count;
        }
        self.queue.clear();
        for f in s.ones() {
            self.cost[f] = 0;
            self.queue.push(Reverse((0, f)));
        }
        for i in 0..self.free_ops.len() {
            let op = self.free_ops[i];
            self.fire(op, 1);
        }

        let mut open_goals = (0..self.is_goal.len())
            .filter(|&g| self.is_goal[g] && !s.contains(g))
            .count();
        while let Some(Reverse((c, f))) = self.queue.pop() {
            if c > self.cost[f] {
                continue;
            }
            if c > 0 && self.is_goal[f] {
                open_goals -= 1;
                if open_goals == 0 {
                    break;
                }
            }
            for w in 0..self.watchers[f].len() {
                let op = self.watchers[f][w];
                self.op_cost[op] += c;
                self.remaining[op] -= 1;
                if self.remaining[op] == 0 {
                    let cost = self.op_cost[op] + 1;
                    self.fire(op, cost);
                }
            }
        }

        let mut total = 0u64;
        for &g in &self.goal {
            if self.cost[g] == INF {
                return None;
            }
            total += self.cost[g];
        }
        Some(total)
    }

    fn fire(&mut self, op: usize, cost: u64) {
        for i in 0..self.ops[op].adds.len() {
            let g = self.ops[op].adds[i];
            if cost < self.cost[g] {
                self.cost[g] = cost;
                self.queue.push(Reverse((cost, g)));
            }
        }
    }
}

/// h_add of `s`; `f64::INFINITY` when the goal is relaxed-unreachable.
pub fn h_add(s: &SearchState, t: &ClassicalTask) -> f64 {
    match HAdd::new(t).eval(s) {
        Some(h) => h as f64,
        None => f64::INFINITY,
    }
}
