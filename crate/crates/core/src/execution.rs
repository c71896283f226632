//! Plan replay with per-agent belief stores, shared-mental-model overlap and
//! per-run metrics.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefError, BeliefState, Fluent, Rml};
use crate::compiler::{ground, ground_fluents, CompileError, GroundAction};
use crate::domains::{is_comm_action, GroundTruth};
use crate::epddl::{DomainSpec, ProblemSpec};
use crate::search::Plan;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecutionError {
    #[error("step {index}: unknown action {label}")]
    UnknownAction { index: usize, label: String },
    #[error("step {index}: {label} is not applicable, missing {}", fmt_list(.missing))]
    Precondition {
        index: usize,
        label: String,
        missing: Vec<Rml>,
    },
    #[error("step {index}: {label} has conflicting effects: {source}")]
    Effect {
        index: usize,
        label: String,
        source: BeliefError,
    },
    #[error("initial state: {0}")]
    Init(BeliefError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("unsupported domain shape: {0}")]
    Unsupported(String),
    #[error("the query set is empty")]
    EmptyQueries,
    #[error("overlap needs at least two belief stores, got {0}")]
    TooFewStores(usize),
}

fn fmt_list(v: &[Rml]) -> String {
    v.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// `None` at step 0.
    pub action: Option<String>,
    pub actor: Option<String>,
    pub noop: bool,
    pub communicated: bool,
    /// Literals whose outermost operator belongs to each agent.
    pub stores: BTreeMap<String, BeliefState>,
    pub world: BeliefState,
}

/// Step 0 is the initial configuration; one further step per plan step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub agents: Vec<String>,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("a trace has an initial step")
    }
}

fn snapshot(state: &BeliefState, agents: &[String]) -> (BTreeMap<String, BeliefState>, BeliefState) {
    let stores = agents.iter().map(|a| (a.clone(), state.of_agent(a))).collect();
    (stores, state.world())
}

/// The closed-world initial state: problem init plus ground truth, with every
/// unstated ground atom false.
pub fn initial_state(d: &DomainSpec, p: &ProblemSpec, gt: &GroundTruth) -> Result<BeliefState, ExecutionError> {
    let mut lits: Vec<Rml> = p.init.clone();
    for f in &gt.facts {
        if !lits.contains(f) {
            lits.push(f.clone());
        }
    }
    let stated: HashSet<&Fluent> = lits.iter().filter(|l| l.depth() == 0).map(|l| &l.fluent).collect();
    let closed: Vec<Rml> = ground_fluents(d, p)
        .into_iter()
        .filter(|f| !stated.contains(f))
        .map(Rml::neg)
        .collect();
    lits.extend(closed);
    BeliefState::from_literals(lits).map_err(ExecutionError::Init)
}

fn noop_actor<'a>(label: &'a str, agents: &[String]) -> Option<&'a str> {
    let a = label.strip_prefix("(noop ")?.strip_suffix(')')?;
    agents.iter().any(|x| x == a).then_some(a)
}

/// Replays `plan` action by action from the closed-world initial state using
/// belief-state semantics: preconditions and guards by entailment in the
/// pre-state, effect items applied in order. Turn no-ops leave the state
/// unchanged.
pub fn simulate(plan: &Plan, gt: &GroundTruth, d: &DomainSpec, p: &ProblemSpec) -> Result<Trace, ExecutionError> {
    let agents = p.agents(d);
    let actions = ground(d, p)?;
    let by_label: HashMap<String, &GroundAction> = actions.iter().map(|a| (a.label(), a)).collect();
    let mut state = initial_state(d, p, gt)?;

    let (stores, world) = snapshot(&state, &agents);
    let mut steps = vec![TraceStep {
        action: None,
        actor: None,
        noop: false,
        communicated: false,
        stores,
        world,
    }];
    for (index, step) in plan.steps.iter().enumerate() {
        let label = &step.label;
        let Some(a) = by_label.get(label) else {
            let Some(actor) = noop_actor(label, &agents) else {
                return Err(ExecutionError::UnknownAction {
                    index,
                    label: label.clone(),
                });
            };
            let mut same = steps.last().unwrap().clone();
            same.action = Some(label.clone());
            same.actor = Some(actor.to_string());
            same.noop = true;
            same.communicated = false;
            steps.push(same);
            continue;
        };
        let missing: Vec<Rml> = a.precondition.iter().filter(|l| !state.entails(l)).cloned().collect();
        if !missing.is_empty() {
            return Err(ExecutionError::Precondition {
                index,
                label: label.clone(),
                missing,
            });
        }
        let fired: Vec<_> = a
            .effects
            .iter()
            .filter(|e| e.guard.iter().all(|g| state.entails(g)))
            .collect();
        let mut communicated = is_comm_action(&a.name);
        for e in &fired {
            communicated |= e
                .adds
                .iter()
                .any(|l| l.outer_agent().is_some_and(|x| Some(x) != a.actor.as_deref()));
            state = state
                .apply_effects(&e.adds, &e.dels)
                .map_err(|source| ExecutionError::Effect {
                    index,
                    label: label.clone(),
                    source,
                })?;
        }
        let (stores, world) = snapshot(&state, &agents);
        steps.push(TraceStep {
            action: Some(label.clone()),
            actor: a.actor.clone(),
            noop: false,
            communicated,
            stores,
            world,
        });
    }
    Ok(Trace { agents, steps })
}

/// A world-level proposition with a polarity. `atoms` is read
/// disjunctively: positive means "some atom holds", negative means "no atom
/// holds".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub label: String,
    pub atoms: Vec<Fluent>,
    pub positive: bool,
}

impl Query {
    fn covered_by(&self, agent: &str, store: &BeliefState) -> bool {
        let believes = |f: &Fluent, neg: bool| store.entails(&Rml::world(f.clone(), neg).believed_by(agent));
        if self.positive {
            self.atoms.iter().any(|f| believes(f, false))
        } else {
            self.atoms.iter().all(|f| believes(f, true))
        }
    }
}

fn place_queries(places: &[&str], content: &str, atoms: impl Fn(&str) -> Vec<Fluent>) -> Vec<Query> {
    let mut out = Vec::with_capacity(4 * places.len());
    for p in places {
        let observed = vec![Fluent::new("observed", [*p])];
        for (positive, atoms, what) in [
            (true, observed.clone(), format!("observed {p}")),
            (false, observed, format!("not observed {p}")),
            (true, atoms(p), format!("{content} at {p}")),
            (false, atoms(p), format!("no {content} at {p}")),
        ] {
            out.push(Query {
                label: what,
                atoms,
                positive,
            });
        }
    }
    out
}

/// Four queries per location: observed or not, and whether something of
/// interest (a survivor, a block) is there or not. Gridworld locations are
/// the `pos` objects; BW4T locations are the `place` objects.
pub fn build_query_set(p: &ProblemSpec, d: &DomainSpec) -> Result<Vec<Query>, ExecutionError> {
    if d.predicate("observed").is_none() {
        return Err(ExecutionError::Unsupported("no `observed` predicate".into()));
    }
    let (loc_ty, content, pred, item_ty) = if d.predicate("survivorat").is_some() && d.has_type("pos") {
        ("pos", "survivor", "survivorat", "survivor")
    } else if d.predicate("blockin").is_some() && d.has_type("place") {
        ("place", "block", "blockin", "block")
    } else {
        return Err(ExecutionError::Unsupported(
            "expected a Gridworld (survivorat over pos) or BW4T (blockin over place) domain".into(),
        ));
    };
    let places: Vec<&str> = p.objects_of(d, loc_ty).collect();
    let items: Vec<&str> = p.objects_of(d, item_ty).collect();
    Ok(place_queries(&places, content, |loc| {
        items.iter().map(|i| Fluent::new(pred, [*i, loc])).collect()
    }))
}

/// Positive queries about something a belief goal asks agents to hold.
pub fn goal_relevant_queries(queries: &[Query], goal: &[Rml]) -> Vec<Query> {
    let targets: HashSet<&Fluent> = goal
        .iter()
        .filter(|g| g.depth() == 1 && !g.chain[0].negated && !g.negated)
        .map(|g| &g.fluent)
        .collect();
    queries
        .iter()
        .filter(|q| q.positive && q.atoms.iter().any(|f| targets.contains(f)))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overlap {
    pub covered: usize,
    pub total: usize,
    /// `covered / total * 100`, rounded to two decimals.
    pub percent: f64,
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Share of queries on which every store agrees, each agent answering with
/// its own belief. An agent that holds neither polarity leaves both queries
/// of a pair uncovered.
pub fn smm_overlap(stores: &BTreeMap<String, BeliefState>, queries: &[Query]) -> Result<Overlap, ExecutionError> {
    if queries.is_empty() {
        return Err(ExecutionError::EmptyQueries);
    }
    if stores.len() < 2 {
        return Err(ExecutionError::TooFewStores(stores.len()));
    }
    let covered = queries
        .iter()
        .filter(|q| stores.iter().all(|(a, s)| q.covered_by(a, s)))
        .count();
    Ok(Overlap {
        covered,
        total: queries.len(),
        percent: round2(covered as f64 / queries.len() as f64 * 100.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Planner wall-clock only.
    pub completion_ms: f64,
    /// Plan steps excluding turn no-ops.
    pub total_actions: usize,
    pub noops: usize,
    pub raw_length: usize,
    pub total_communications: usize,
    /// Overlap at the final step; `None` for single-agent teams.
    pub sharedness_percent: Option<f64>,
    pub sharedness_trajectory: Vec<f64>,
    /// Overlap of each agent pair at the final step, keyed `a1-a2`.
    #[serde(default)]
    pub pairwise_sharedness: Option<BTreeMap<String, f64>>,
}

fn pair_overlaps(step: &TraceStep, queries: &[Query]) -> Result<BTreeMap<String, f64>, ExecutionError> {
    let agents: Vec<&String> = step.stores.keys().collect();
    let mut out = BTreeMap::new();
    for (i, a) in agents.iter().enumerate() {
        for b in &agents[i + 1..] {
            let pair: BTreeMap<String, BeliefState> = [
                ((*a).clone(), step.stores[*a].clone()),
                ((*b).clone(), step.stores[*b].clone()),
            ]
            .into();
            out.insert(format!("{a}-{b}"), smm_overlap(&pair, queries)?.percent);
        }
    }
    Ok(out)
}

pub fn metrics(plan: &Plan, trace: &Trace, queries: &[Query], pairwise: bool) -> Result<MetricsRecord, ExecutionError> {
    if queries.is_empty() {
        return Err(ExecutionError::EmptyQueries);
    }
    let acted = &trace.steps[1..];
    let noops = acted.iter().filter(|s| s.noop).count();
    let (trajectory, pairs) = if trace.agents.len() >= 2 {
        let trajectory = trace
            .steps
            .iter()
            .map(|s| smm_overlap(&s.stores, queries).map(|o| o.percent))
            .collect::<Result<Vec<_>, _>>()?;
        let pairs = if pairwise {
            Some(pair_overlaps(trace.last(), queries)?)
        } else {
            None
        };
        (trajectory, pairs)
    } else {
        (Vec::new(), None)
    };
    Ok(MetricsRecord {
        completion_ms: plan.provenance.planning_ms,
        total_actions: acted.len() - noops,
        noops,
        raw_length: acted.len(),
        total_communications: acted.iter().filter(|s| s.communicated).count(),
        sharedness_percent: trajectory.last().copied(),
        sharedness_trajectory: trajectory,
        pairwise_sharedness: pairs,
    })
}
