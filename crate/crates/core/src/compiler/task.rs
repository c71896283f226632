use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::belief::{BeliefState, DepthBound, Fluent, Rml};
use crate::epddl::{validate, DomainSpec, ProblemSpec};

use super::ground::{ground, ground_fluents, label, product, GroundAction};
use super::{enumerate_rmls, CompileError};

/// Version tag of the JSON task artifact.
pub const TASK_SCHEMA: u32 = 1;

/// Bijection between RMLs and dense fluent indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Rml>", into = "Vec<Rml>")]
pub struct FluentTable {
    literals: Vec<Rml>,
    index: HashMap<Rml, usize>,
}

impl FluentTable {
    pub fn new(literals: Vec<Rml>) -> Self {
        let index = literals.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        FluentTable { literals, index }
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn index_of(&self, l: &Rml) -> Option<usize> {
        self.index.get(l).copied()
    }

    pub fn literal(&self, i: usize) -> &Rml {
        &self.literals[i]
    }

    pub fn literals(&self) -> &[Rml] {
        &self.literals
    }

    fn push(&mut self, l: Rml) -> usize {
        let i = self.literals.len();
        self.index.insert(l.clone(), i);
        self.literals.push(l);
        i
    }

    /// Decodes a set of indices into a belief state.
    pub fn decode<I: IntoIterator<Item = usize>>(&self, indices: I) -> BeliefState {
        indices.into_iter().map(|i| self.literals[i].clone()).collect()
    }
}

impl From<Vec<Rml>> for FluentTable {
    fn from(value: Vec<Rml>) -> Self {
        FluentTable::new(value)
    }
}

impl From<FluentTable> for Vec<Rml> {
    fn from(value: FluentTable) -> Self {
        value.literals
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassicalEffect {
    pub guard: Vec<usize>,
    pub adds: Vec<usize>,
    pub dels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalAction {
    pub name: String,
    pub args: Vec<String>,
    pub actor: Option<String>,
    /// Turn-filler added by [`add_turn_constraint`].
    #[serde(default)]
    pub noop: bool,
    pub pre: Vec<usize>,
    pub effects: Vec<ClassicalEffect>,
}

impl ClassicalAction {
    pub fn label(&self) -> String {
        label(&self.name, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalTask {
    pub schema: u32,
    pub fluents: FluentTable,
    pub init: Vec<usize>,
    pub goal: Vec<usize>,
    pub actions: Vec<ClassicalAction>,
    pub agents: Vec<String>,
    /// `turn` fluents by roster position, when turn-taking is on.
    pub turn_fluents: Option<Vec<usize>>,
}

impl ClassicalTask {
    pub fn init_state(&self) -> BeliefState {
        self.fluents.decode(self.init.iter().copied())
    }

    pub fn goal_literals(&self) -> Vec<Rml> {
        self.goal.iter().map(|&i| self.fluents.literal(i).clone()).collect()
    }

    pub fn action_by_label(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.label() == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompileOptions {
    pub depth: DepthBound,
    pub turn_taking: bool,
}

/// Validates, grounds and compiles a task. The fluent table is the full
/// enumeration; see [`prune_unreachable`] for the reduced form.
pub fn compile(d: &DomainSpec, p: &ProblemSpec, opts: CompileOptions) -> Result<ClassicalTask, CompileError> {
    let diagnostics = validate(d, p, opts.depth);
    if !diagnostics.is_empty() {
        return Err(CompileError::Invalid(diagnostics));
    }
    let actions = ground(d, p)?;
    compile_ground(
        &ground_fluents(d, p),
        &p.agents(d),
        &p.init,
        &p.goal.conjuncts,
        &actions,
        opts,
    )
}

/// Alternatives that make `l` hold: itself, plus the literal the KD closure
/// rule derives it from.
fn supports(table: &FluentTable, l: &Rml) -> Result<Vec<usize>, CompileError> {
    let own = table.index_of(l).ok_or_else(|| CompileError::OutsideTable(l.clone()))?;
    let mut out = vec![own];
    if let Some(src) = l.closure_source() {
        if let Some(i) = table.index_of(&src) {
            out.push(i);
        }
    }
    Ok(out)
}

/// Membership-only encodings of an entailment check over `lits`: one index
/// set per way of satisfying every literal.
fn entailment_variants(table: &FluentTable, lits: &[Rml]) -> Result<Vec<Vec<usize>>, CompileError> {
    let options = lits.iter().map(|l| supports(table, l)).collect::<Result<Vec<_>, _>>()?;
    Ok(product(&options)
        .into_iter()
        .map(|v| {
            let set: BTreeSet<usize> = v.into_iter().collect();
            set.into_iter().collect()
        })
        .collect())
}

/// Compiles already-ground actions over the given fluent universe.
pub fn compile_ground(
    fluents: &[Fluent],
    agents: &[String],
    init: &[Rml],
    goal: &[Rml],
    actions: &[GroundAction],
    opts: CompileOptions,
) -> Result<ClassicalTask, CompileError> {
    let table = FluentTable::new(enumerate_rmls(fluents, agents, opts.depth.get())?);

    // closed world at depth 0: every ground atom not stated true is false
    let mut init_lits: Vec<Rml> = init.to_vec();
    let stated: HashSet<&Fluent> = init.iter().filter(|l| l.depth() == 0).map(|l| &l.fluent).collect();
    for f in fluents {
        if !stated.contains(f) {
            init_lits.push(Rml::neg(f.clone()));
        }
    }
    let init_state = BeliefState::from_literals(init_lits).map_err(CompileError::InitConflict)?;
    let mut init_idx = Vec::with_capacity(init_state.len());
    for l in init_state.iter() {
        init_idx.push(table.index_of(l).ok_or_else(|| CompileError::OutsideTable(l.clone()))?);
    }
    init_idx.sort_unstable();

    let mut goal_idx = Vec::with_capacity(goal.len());
    for l in goal {
        let i = table.index_of(l).ok_or_else(|| CompileError::OutsideTable(l.clone()))?;
        if !goal_idx.contains(&i) {
            goal_idx.push(i);
        }
    }

    let mut out_actions = Vec::with_capacity(actions.len());
    for a in actions {
        let mut effects = Vec::new();
        for e in &a.effects {
            for (i, l) in e.adds.iter().enumerate() {
                if let Some(other) = e.adds[i + 1..].iter().find(|o| l.conflicts(o)) {
                    return Err(CompileError::ConflictingEffect {
                        action: a.label(),
                        first: l.clone(),
                        second: other.clone(),
                    });
                }
            }
            let mut adds = Vec::with_capacity(e.adds.len());
            let mut dels = BTreeSet::new();
            for l in &e.adds {
                adds.push(table.index_of(l).ok_or_else(|| CompileError::OutsideTable(l.clone()))?);
                for p in l.conflict_partners() {
                    if let Some(i) = table.index_of(&p) {
                        dels.insert(i);
                    }
                }
            }
            for l in &e.dels {
                if let Some(i) = table.index_of(l) {
                    dels.insert(i);
                }
            }
            for guard in entailment_variants(&table, &e.guard)? {
                effects.push(ClassicalEffect {
                    guard,
                    adds: adds.clone(),
                    dels: dels.iter().copied().collect(),
                });
            }
        }
        for pre in entailment_variants(&table, &a.precondition)? {
            out_actions.push(ClassicalAction {
                name: a.name.clone(),
                args: a.args.clone(),
                actor: a.actor.clone(),
                noop: false,
                pre,
                effects: effects.clone(),
            });
        }
    }

    let task = ClassicalTask {
        schema: TASK_SCHEMA,
        fluents: table,
        init: init_idx,
        goal: goal_idx,
        actions: out_actions,
        agents: agents.to_vec(),
        turn_fluents: None,
    };
    if opts.turn_taking {
        add_turn_constraint(task)
    } else {
        Ok(task)
    }
}

/// Round-robin turn-taking: `(turn a)` fluents, each action requires its
/// actor's turn and passes the token on, and one `(noop a)` per agent lets
/// an idle agent pass.
pub fn add_turn_constraint(mut t: ClassicalTask) -> Result<ClassicalTask, CompileError> {
    if t.turn_fluents.is_some() || t.fluents.literals().iter().any(|l| l.fluent.predicate == "turn") {
        return Err(CompileError::TurnFluentClash);
    }
    if t.agents.is_empty() {
        return Err(CompileError::EmptyUniverse("agent".into()));
    }
    let turn: Vec<usize> = t
        .agents
        .iter()
        .map(|a| t.fluents.push(Rml::pos(Fluent::new("turn", [a.clone()]))))
        .collect();
    let position: HashMap<&str, usize> = t.agents.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let n = t.agents.len();
    let pass = |i: usize| ClassicalEffect {
        guard: Vec::new(),
        adds: vec![turn[(i + 1) % n]],
        dels: vec![turn[i]],
    };

    let mut actions = Vec::with_capacity(t.actions.len() + n);
    for (i, agent) in t.agents.iter().enumerate() {
        actions.push(ClassicalAction {
            name: "noop".into(),
            args: vec![agent.clone()],
            actor: Some(agent.clone()),
            noop: true,
            pre: vec![turn[i]],
            effects: vec![pass(i)],
        });
    }
    for mut a in t.actions.drain(..) {
        let i = a
            .actor
            .as_deref()
            .and_then(|actor| position.get(actor).copied())
            .ok_or_else(|| CompileError::NoActor(a.label()))?;
        a.pre.push(turn[i]);
        a.effects.push(pass(i));
        actions.push(a);
    }
    t.actions = actions;
    t.init.push(turn[0]);
    t.init.sort_unstable();
    t.turn_fluents = Some(turn);
    Ok(t)
}

/// Drops actions and effects that relaxed reachability rules out, fluents
/// that can never become true, and fluents that are true throughout. Plans
/// are unchanged; states are projected onto the remaining fluents.
pub fn prune_unreachable(t: &ClassicalTask) -> ClassicalTask {
    let n = t.fluents.len();
    let mut reached = vec![false; n];
    for &i in &t.init {
        reached[i] = true;
    }
    let holds = |set: &[usize], reached: &[bool]| set.iter().all(|&i| reached[i]);
    let mut changed = true;
    while changed {
        changed = false;
        for a in &t.actions {
            if !holds(&a.pre, &reached) {
                continue;
            }
            for e in &a.effects {
                if holds(&e.guard, &reached) {
                    for &i in &e.adds {
                        if !reached[i] {
                            reached[i] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
    }

    let live: Vec<&ClassicalAction> = t.actions.iter().filter(|a| holds(&a.pre, &reached)).collect();
    let mut deleted = vec![false; n];
    for a in &live {
        for e in a.effects.iter().filter(|e| holds(&e.guard, &reached)) {
            for &i in &e.dels {
                deleted[i] = true;
            }
        }
    }
    let mut in_init = vec![false; n];
    for &i in &t.init {
        in_init[i] = true;
    }
    let invariant = |i: usize| in_init[i] && !deleted[i];
    let turn: HashSet<usize> = t.turn_fluents.iter().flatten().copied().collect();

    let keep: Vec<bool> = (0..n)
        .map(|i| turn.contains(&i) || (reached[i] && !invariant(i)) || (!reached[i] && t.goal.contains(&i)))
        .collect();
    let mut remap = vec![usize::MAX; n];
    let mut literals = Vec::new();
    for i in 0..n {
        if keep[i] {
            remap[i] = literals.len();
            literals.push(t.fluents.literal(i).clone());
        }
    }
    let project = |set: &[usize]| -> Vec<usize> { set.iter().filter(|&&i| keep[i]).map(|&i| remap[i]).collect() };

    let actions = live
        .into_iter()
        .map(|a| ClassicalAction {
            name: a.name.clone(),
            args: a.args.clone(),
            actor: a.actor.clone(),
            noop: a.noop,
            pre: project(&a.pre),
            effects: a
                .effects
                .iter()
                .filter(|e| holds(&e.guard, &reached))
                .map(|e| ClassicalEffect {
                    guard: project(&e.guard),
                    adds: project(&e.adds),
                    dels: project(&e.dels),
                })
                .filter(|e| !e.adds.is_empty() || !e.dels.is_empty())
                .collect(),
        })
        .collect();

    ClassicalTask {
        schema: t.schema,
        fluents: FluentTable::new(literals),
        init: project(&t.init),
        goal: project(&t.goal),
        actions,
        agents: t.agents.clone(),
        turn_fluents: t.turn_fluents.as_ref().map(|v| project(v)),
    }
}
