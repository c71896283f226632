//! Reference implementations used as test oracles. They work on belief
//! states and ground actions directly and never touch the compiled task.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use epcomm::belief::{BeliefState, Fluent, Modality, Rml};
use epcomm::compiler::{ground, ground_fluents, GroundAction};
use epcomm::domains::GeneratedTask;

/// Closed-world initial belief state of a generated task.
pub fn reference_init(t: &GeneratedTask) -> BeliefState {
    let stated: HashSet<Fluent> = t
        .problem
        .init
        .iter()
        .filter(|l| l.depth() == 0)
        .map(|l| l.fluent.clone())
        .collect();
    let mut lits = t.problem.init.clone();
    for f in ground_fluents(&t.domain, &t.problem) {
        if !stated.contains(&f) {
            lits.push(Rml::neg(f));
        }
    }
    BeliefState::from_literals(lits).unwrap()
}

pub fn reference_applicable(s: &BeliefState, a: &GroundAction) -> bool {
    a.precondition.iter().all(|l| s.entails(l))
}

/// Guards read the pre-state, items apply in order.
pub fn reference_step(s: &BeliefState, a: &GroundAction) -> BeliefState {
    let mut next = s.clone();
    for e in &a.effects {
        if e.guard.iter().all(|g| s.entails(g)) {
            next = next.apply_effects(&e.adds, &e.dels).unwrap();
        }
    }
    next
}

#[derive(Debug, PartialEq, Eq)]
pub enum Shortest {
    Length(usize),
    Unsolvable,
    TooLarge,
}

/// Plain breadth-first search over belief states. With `turns`, the acting
/// agent cycles through the roster and each agent may also idle.
pub fn reference_shortest(t: &GeneratedTask, turns: bool, max_states: usize) -> Shortest {
    let actions = ground(&t.domain, &t.problem).unwrap();
    let agents = t.problem.agents(&t.domain);
    let goal = t.problem.goal.conjuncts.clone();
    let is_goal = |s: &BeliefState| goal.iter().all(|g| s.entails(g));

    let init = (reference_init(t), 0usize);
    if is_goal(&init.0) {
        return Shortest::Length(0);
    }
    let mut seen: HashMap<(BeliefState, usize), usize> = HashMap::new();
    seen.insert(init.clone(), 0);
    let mut queue = VecDeque::from([init]);
    while let Some((s, turn)) = queue.pop_front() {
        let g = seen[&(s.clone(), turn)];
        let next_turn = if turns { (turn + 1) % agents.len() } else { 0 };
        let mut children = Vec::new();
        if turns {
            children.push(s.clone());
        }
        for a in &actions {
            if turns && a.actor.as_deref() != Some(agents[turn].as_str()) {
                continue;
            }
            if reference_applicable(&s, a) {
                children.push(reference_step(&s, a));
            }
        }
        for c in children {
            let key = (c, next_turn);
            if seen.contains_key(&key) {
                continue;
            }
            if is_goal(&key.0) {
                return Shortest::Length(g + 1);
            }
            if seen.len() >= max_states {
                return Shortest::TooLarge;
            }
            seen.insert(key.clone(), g + 1);
            queue.push_back(key);
        }
    }
    Shortest::Unsolvable
}

/// Every RML over the given fluents and agents up to `depth`, built by
/// counting through all operator words of each length.
pub fn brute_force_rmls(fluents: &[Fluent], agents: &[String], depth: usize) -> BTreeSet<Rml> {
    let letters = 2 * agents.len();
    let mut out = BTreeSet::new();
    for k in 0..=depth {
        let words = letters.pow(k as u32);
        for w in 0..words {
            let mut chain = Vec::with_capacity(k);
            let mut x = w;
            for _ in 0..k {
                let letter = x % letters;
                x /= letters;
                let agent = agents[letter / 2].clone();
                chain.push(if letter % 2 == 0 {
                    Modality::believes(agent)
                } else {
                    Modality::doubts(agent)
                });
            }
            for f in fluents {
                for negated in [false, true] {
                    let mut l = Rml::world(f.clone(), negated);
                    for m in chain.iter().rev() {
                        l = l.under(m.clone());
                    }
                    out.insert(l);
                }
            }
        }
    }
    out
}

pub fn nullary_fluents(n: usize) -> Vec<Fluent> {
    (0..n)
        .map(|i| Fluent::new(format!("f{i}"), Vec::<String>::new()))
        .collect()
}

pub fn roster(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("a{i}")).collect()
}
