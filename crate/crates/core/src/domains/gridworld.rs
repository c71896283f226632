use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Fluent, Rml};
use crate::epddl::{parse_domain, GoalFormula, ProblemSpec, TypedName};

use super::{
    agent_names, apply_comm_model, config_error, rml, CommModel, DomainError, GeneratedTask, GroundTruth, Scenario,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridworldConfig {
    pub width: usize,
    pub height: usize,
    /// Roster in turn order.
    pub agents: Vec<String>,
    /// Agent → cell name (`p1..`, row-major).
    pub agent_starts: BTreeMap<String, String>,
    /// Survivor → cell name (ground truth).
    pub survivors: BTreeMap<String, String>,
    #[serde(default)]
    pub blocked: Vec<String>,
    pub scenario: Scenario,
    pub model: CommModel,
    #[serde(default)]
    pub commander: Option<String>,
    #[serde(default)]
    pub liaison: Option<String>,
    /// S5: the agent that must reach `target` and learn the survivor's cell.
    #[serde(default)]
    pub designated: Option<String>,
    #[serde(default)]
    pub target: Option<String>,
}

pub(crate) fn cell(width: usize, row: usize, col: usize) -> String {
    format!("p{}", row * width + col + 1)
}

fn neighbours(width: usize, height: usize, i: usize) -> Vec<usize> {
    let (r, c) = (i / width, i % width);
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push(i - width);
    }
    if r + 1 < height {
        out.push(i + width);
    }
    if c > 0 {
        out.push(i - 1);
    }
    if c + 1 < width {
        out.push(i + 1);
    }
    out
}

/// Cells reachable from `from` avoiding `blocked` (indices).
fn reachable(width: usize, height: usize, from: usize, blocked: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(i) = queue.pop_front() {
        for n in neighbours(width, height, i) {
            if !blocked.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen
}

impl GridworldConfig {
    /// Seeded default layout: distinct starts, three survivors on distinct
    /// cells (one in S5, plus two blocked cells and a target), the last agent
    /// as commander and the first as liaison / designated agent.
    pub fn seeded(
        width: usize,
        height: usize,
        n_agents: usize,
        scenario: Scenario,
        model: CommModel,
        seed: u64,
    ) -> Result<Self, DomainError> {
        let cells = width * height;
        if n_agents == 0 || n_agents > cells {
            return Err(config_error(format!(
                "{n_agents} agents do not fit a {width}x{height} grid"
            )));
        }
        let agents = agent_names(n_agents);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..cells).map(|i| cell(width, i / width, i % width)).collect();

        for _ in 0..1000 {
            let mut order: Vec<usize> = (0..cells).collect();
            order.shuffle(&mut rng);
            let starts = &order[..n_agents];
            if scenario == Scenario::BlockedCells {
                let blocked: BTreeSet<usize> = order[n_agents..].iter().take(2).copied().collect();
                if blocked.len() < 2 {
                    return Err(config_error("grid too small for two blocked cells"));
                }
                // every open cell must stay reachable
                let open = reachable(width, height, starts[0], &blocked);
                if open.len() != cells - blocked.len() {
                    continue;
                }
                // the designated agent must manage alone, even if nobody
                // else ever moves out of its way
                let mut walls = blocked.clone();
                walls.extend(starts[1..].iter().copied());
                let solo: Vec<usize> = reachable(width, height, starts[0], &walls).into_iter().collect();
                let candidates: Vec<usize> = solo.iter().copied().filter(|&i| i != starts[0]).collect();
                let Some(&target) = candidates.choose(&mut rng) else {
                    continue;
                };
                let mut free = solo;
                free.shuffle(&mut rng);
                let survivors = BTreeMap::from([("s1".to_string(), names[free[0]].clone())]);
                return Ok(GridworldConfig {
                    width,
                    height,
                    agent_starts: agents
                        .iter()
                        .zip(starts)
                        .map(|(a, &i)| (a.clone(), names[i].clone()))
                        .collect(),
                    survivors,
                    blocked: blocked.iter().map(|&i| names[i].clone()).collect(),
                    scenario,
                    model,
                    commander: None,
                    liaison: None,
                    designated: Some(agents[0].clone()),
                    target: Some(names[target].clone()),
                    agents,
                });
            }
            let mut free: Vec<usize> = (0..cells).collect();
            free.shuffle(&mut rng);
            let survivors = (0..3.min(cells))
                .map(|k| (format!("s{}", k + 1), names[free[k]].clone()))
                .collect();
            let has_commander = scenario.has_commander();
            if has_commander && n_agents < 2 {
                return Err(config_error("commander scenarios need at least two agents"));
            }
            return Ok(GridworldConfig {
                width,
                height,
                agent_starts: agents
                    .iter()
                    .zip(starts)
                    .map(|(a, &i)| (a.clone(), names[i].clone()))
                    .collect(),
                survivors,
                blocked: Vec::new(),
                scenario,
                model,
                commander: has_commander.then(|| agents[n_agents - 1].clone()),
                liaison: (scenario == Scenario::CommanderNonBroadcast).then(|| agents[0].clone()),
                designated: None,
                target: None,
                agents,
            });
        }
        Err(config_error("no connected layout with two blocked cells found"))
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        let i: usize = name.strip_prefix('p')?.parse().ok()?;
        (1..=self.width * self.height).contains(&i).then(|| i - 1)
    }

    fn check(&self) -> Result<(), DomainError> {
        if self.width == 0 || self.height == 0 {
            return Err(config_error("grid must be at least 1x1"));
        }
        if self.agents.is_empty() {
            return Err(config_error("at least one agent is required"));
        }
        let mut used = BTreeSet::new();
        for a in &self.agents {
            let start = self
                .agent_starts
                .get(a)
                .ok_or_else(|| config_error(format!("agent {a} has no start cell")))?;
            self.index_of(start)
                .ok_or_else(|| config_error(format!("start {start} of {a} is outside the grid")))?;
            if !used.insert(start) {
                return Err(config_error(format!("two agents start on {start}")));
            }
            if self.blocked.contains(start) {
                return Err(config_error(format!("agent {a} starts on blocked cell {start}")));
            }
        }
        for p in self.survivors.values().chain(&self.blocked) {
            self.index_of(p)
                .ok_or_else(|| config_error(format!("cell {p} is outside the grid")))?;
        }
        for (s, p) in &self.survivors {
            if self.blocked.contains(p) {
                return Err(config_error(format!("survivor {s} is on blocked cell {p}")));
            }
        }
        let agent = |role: &Option<String>, what: &str| -> Result<String, DomainError> {
            let a = role
                .clone()
                .ok_or_else(|| config_error(format!("{} needs a {what}", self.scenario)))?;
            if !self.agents.contains(&a) {
                return Err(config_error(format!("{what} {a} is not on the roster")));
            }
            Ok(a)
        };
        if self.scenario.has_commander() {
            let c = agent(&self.commander, "commander")?;
            if self.agents.len() < 2 {
                return Err(config_error(
                    "commander scenarios need a searcher besides the commander",
                ));
            }
            if self.scenario == Scenario::CommanderNonBroadcast && agent(&self.liaison, "liaison")? == c {
                return Err(config_error("the liaison cannot be the commander"));
            }
        }
        if self.scenario == Scenario::BlockedCells {
            let d = agent(&self.designated, "designated agent")?;
            let target = self
                .target
                .as_ref()
                .ok_or_else(|| config_error("S5 needs a target cell"))?;
            let t = self
                .index_of(target)
                .ok_or_else(|| config_error(format!("target {target} is outside the grid")))?;
            let blocked: BTreeSet<usize> = self.blocked.iter().filter_map(|p| self.index_of(p)).collect();
            let start = self.index_of(&self.agent_starts[&d]).unwrap();
            let open = reachable(self.width, self.height, start, &blocked);
            if !open.contains(&t) {
                return Err(config_error(format!("target {target} is unreachable for {d}")));
            }
            for (s, p) in &self.survivors {
                if !open.contains(&self.index_of(p).unwrap()) {
                    return Err(config_error(format!("survivor {s} at {p} is walled off")));
                }
            }
        }
        Ok(())
    }

    fn searchers(&self) -> Vec<&String> {
        self.agents
            .iter()
            .filter(|a| !(self.scenario.has_commander() && self.commander.as_ref() == Some(*a)))
            .collect()
    }
}

fn domain_text(scenario: Scenario) -> String {
    let blocked = scenario == Scenario::BlockedCells;
    let mut predicates = String::from(
        "(at ?a - agent ?p - pos)
    (adj ?p ?q - pos)
    (occupied ?p - pos)
    (searcher ?a - agent)
    (observed ?p - pos)
    (survivorat ?s - survivor ?p - pos)",
    );
    if blocked {
        predicates.push_str("\n    (blocked ?p - pos)");
    }
    if scenario.has_commander() {
        predicates.push_str("\n    (commander ?a - agent)\n    (commandpost ?p - pos)");
    }
    if scenario == Scenario::CommanderNonBroadcast {
        predicates.push_str("\n    (liaison ?a - agent)");
    }

    let move_guard = if blocked { " (not (blocked ?to))" } else { "" };
    let reveal = if blocked {
        "
      (forall (?q - pos) (when (and (adj ?p ?q) (blocked ?q)) [?a](blocked ?q)))
      (forall (?q - pos) (when (and (adj ?p ?q) (not (blocked ?q))) [?a](not (blocked ?q))))"
    } else {
        ""
    };
    let comm = if scenario == Scenario::CommanderNonBroadcast {
        "(:action commsurvivor
    :derive-condition always
    :parameters (?p - pos ?a - agent ?s - survivor ?c - agent)
    :precondition (and (liaison ?a) (commander ?c) (at ?a ?p) [?a](survivorat ?s ?p))
    :effect (and [?c](survivorat ?s ?p)))"
    } else {
        "(:action commsurvivor
    :derive-condition  always
    :parameters        (?p - pos ?a - agent  ?s
                        - survivor)
    :precondition      (and (at ?a ?p) [?a]
                          (survivorat ?s ?p))
    :effect            (and (forall ?g - agent
                          [?g](survivorat ?s ?p
                       ))))"
    };

    format!(
        "; Gridworld search task, scenario {scenario}
(define (domain gridworld)
  (:requirements :typing :conditional-effects)
  (:types pos agent survivor)
  (:predicates
    {predicates})

  (:action move
    :derive-condition always
    :parameters (?a - agent ?from - pos ?to - pos)
    :precondition (and (searcher ?a) (at ?a ?from) (adj ?from ?to) (not (occupied ?to)){move_guard})
    :effect (and (at ?a ?to) (not (at ?a ?from)) (occupied ?to) (not (occupied ?from))))

  (:action observe
    :derive-condition always
    :parameters (?a - agent ?p - pos)
    :precondition (and (searcher ?a) (at ?a ?p))
    :effect (and (observed ?p) [?a](observed ?p)
      (forall (?s - survivor) (when (survivorat ?s ?p) [?a](survivorat ?s ?p)))
      (forall (?s - survivor) (when (not (survivorat ?s ?p)) [?a](not (survivorat ?s ?p)))){reveal}))

  {comm})
"
    )
}

/// Generates the Gridworld domain, problem and ground truth for `c`.
pub fn gridworld(c: &GridworldConfig) -> Result<GeneratedTask, DomainError> {
    c.check()?;
    let domain = apply_comm_model(&parse_domain(&domain_text(c.scenario))?, c.model, c.scenario)?;

    let cells: Vec<String> = (0..c.width * c.height)
        .map(|i| cell(c.width, i / c.width, i % c.width))
        .collect();
    let mut objects: Vec<TypedName> = cells.iter().map(|p| TypedName::new(p, "pos")).collect();
    objects.extend(c.agents.iter().map(|a| TypedName::new(a, "agent")));
    objects.extend(c.survivors.keys().map(|s| TypedName::new(s, "survivor")));

    let searchers = c.searchers();
    let mut init = Vec::new();
    for a in &c.agents {
        init.push(rml(&format!("(at {a} {})", c.agent_starts[a])));
    }
    for a in &searchers {
        init.push(rml(&format!("(searcher {a})")));
        // the commander's cell stays enterable so others can report in person
        init.push(rml(&format!("(occupied {})", c.agent_starts[*a])));
    }
    for i in 0..cells.len() {
        for n in neighbours(c.width, c.height, i) {
            init.push(rml(&format!("(adj {} {})", cells[i], cells[n])));
        }
    }
    let mut truth: Vec<Rml> = c
        .survivors
        .iter()
        .map(|(s, p)| rml(&format!("(survivorat {s} {p})")))
        .collect();
    truth.extend(c.blocked.iter().map(|p| rml(&format!("(blocked {p})"))));
    init.extend(truth.iter().cloned());
    if let Some(cmd) = c.commander.as_ref().filter(|_| c.scenario.has_commander()) {
        init.push(rml(&format!("(commander {cmd})")));
        init.push(rml(&format!("(commandpost {})", c.agent_starts[cmd])));
    }
    if let (Scenario::CommanderNonBroadcast, Some(l)) = (c.scenario, &c.liaison) {
        init.push(rml(&format!("(liaison {l})")));
    }

    let survivor_beliefs = |a: &str| -> Vec<Rml> {
        c.survivors
            .iter()
            .map(|(s, p)| Rml::pos(Fluent::new("survivorat", [s.as_str(), p.as_str()])).believed_by(a))
            .collect()
    };
    let observed_all = cells.iter().map(|p| rml(&format!("(observed {p})")));
    let conjuncts: Vec<Rml> = match c.scenario {
        Scenario::EpistemicGoal => observed_all
            .chain(c.agents.iter().flat_map(|a| survivor_beliefs(a)))
            .collect(),
        Scenario::NonEpistemicGoal => observed_all.collect(),
        Scenario::CommanderBroadcast | Scenario::CommanderNonBroadcast => {
            let cmd = c.commander.as_deref().unwrap();
            observed_all.chain(survivor_beliefs(cmd)).collect()
        }
        Scenario::BlockedCells => {
            let d = c.designated.as_deref().unwrap();
            std::iter::once(rml(&format!("(at {d} {})", c.target.as_deref().unwrap())))
                .chain(survivor_beliefs(d))
                .collect()
        }
    };

    let problem = ProblemSpec {
        name: format!("gridworld-{}x{}-{}-{}", c.width, c.height, c.scenario, c.model),
        domain: domain.name.clone(),
        objects,
        init,
        goal: GoalFormula { conjuncts },
    };
    Ok(GeneratedTask {
        domain,
        problem,
        ground_truth: GroundTruth {
            domain: "gridworld".into(),
            facts: truth,
        },
    })
}
