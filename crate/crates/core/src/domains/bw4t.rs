use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Fluent, Rml};
use crate::epddl::{parse_domain, GoalFormula, ProblemSpec, TypedName};

use super::{
    agent_names, apply_comm_model, config_error, rml, CommModel, DomainError, GeneratedTask, GroundTruth, Scenario,
};

pub const COLORS: [&str; 4] = ["red", "blue", "green", "yellow"];

/// Name of the single drop zone.
pub const DROP_ZONE: &str = "dz";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlacement {
    pub room: String,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bw4tConfig {
    /// Rooms are `r1..rN`, laid out along a corridor starting at the drop zone.
    pub rooms: usize,
    /// Block → placement (ground truth for the room, public for the color).
    pub blocks: BTreeMap<String, BlockPlacement>,
    /// Colors to deliver, in delivery order.
    pub target_colors: Vec<String>,
    /// Roster in turn order.
    pub agents: Vec<String>,
    /// Agent → place (`dz` or a room).
    pub agent_starts: BTreeMap<String, String>,
    #[serde(default)]
    pub blocked_room: Option<String>,
    pub scenario: Scenario,
    pub model: CommModel,
    #[serde(default)]
    pub commander: Option<String>,
    #[serde(default)]
    pub liaison: Option<String>,
    /// S5: the agent that must learn which room is blocked.
    #[serde(default)]
    pub designated: Option<String>,
}

fn room(i: usize) -> String {
    format!("r{i}")
}

impl Bw4tConfig {
    /// Seeded default: four blocks, two distinct target colors carried by
    /// `b1` and `b2`, two decoys in the other colors, searchers at the drop
    /// zone, the commander (last agent) in the last room, `a1` as liaison or
    /// designated agent, and in S5 one blocked room holding no block.
    pub fn seeded(
        rooms: usize,
        n_agents: usize,
        scenario: Scenario,
        model: CommModel,
        seed: u64,
    ) -> Result<Self, DomainError> {
        if rooms == 0 {
            return Err(config_error("at least one room is required"));
        }
        if n_agents == 0 {
            return Err(config_error("at least one agent is required"));
        }
        if scenario.has_commander() && n_agents < 2 {
            return Err(config_error("commander scenarios need at least two agents"));
        }
        let blocked_room = if scenario == Scenario::BlockedCells {
            if rooms < 2 {
                return Err(config_error("S5 needs a blocked room and an open one"));
            }
            Some(room(ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(1..=rooms)))
        } else {
            None
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut colors: Vec<&str> = COLORS.to_vec();
        colors.shuffle(&mut rng);
        let open: Vec<String> = (1..=rooms)
            .map(room)
            .filter(|r| Some(r) != blocked_room.as_ref())
            .collect();
        let blocks = colors
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let r = open.choose(&mut rng).expect("an open room").clone();
                (
                    format!("b{}", i + 1),
                    BlockPlacement {
                        room: r,
                        color: c.to_string(),
                    },
                )
            })
            .collect();
        let agents = agent_names(n_agents);
        let commander = scenario.has_commander().then(|| agents[n_agents - 1].clone());
        let agent_starts = agents
            .iter()
            .map(|a| {
                let start = if Some(a) == commander.as_ref() {
                    room(rooms)
                } else {
                    DROP_ZONE.to_string()
                };
                (a.clone(), start)
            })
            .collect();
        Ok(Bw4tConfig {
            rooms,
            blocks,
            target_colors: colors[..2].iter().map(|c| c.to_string()).collect(),
            agent_starts,
            blocked_room,
            scenario,
            model,
            commander,
            liaison: (scenario == Scenario::CommanderNonBroadcast).then(|| agents[0].clone()),
            designated: (scenario == Scenario::BlockedCells).then(|| agents[0].clone()),
            agents,
        })
    }

    fn is_room(&self, name: &str) -> bool {
        name.strip_prefix('r')
            .and_then(|i| i.parse::<usize>().ok())
            .is_some_and(|i| (1..=self.rooms).contains(&i))
    }

    fn check(&self) -> Result<(), DomainError> {
        if self.rooms == 0 {
            return Err(config_error("at least one room is required"));
        }
        if self.agents.is_empty() {
            return Err(config_error("at least one agent is required"));
        }
        for a in &self.agents {
            let start = self
                .agent_starts
                .get(a)
                .ok_or_else(|| config_error(format!("agent {a} has no start place")))?;
            if start != DROP_ZONE && !self.is_room(start) {
                return Err(config_error(format!("start {start} of {a} is not a place")));
            }
            if Some(start) == self.blocked_room.as_ref() {
                return Err(config_error(format!("agent {a} starts in blocked room {start}")));
            }
        }
        for (b, p) in &self.blocks {
            if p.room == DROP_ZONE {
                return Err(config_error(format!(
                    "block {b} already sits in the drop zone; deliveries must start unsatisfied"
                )));
            }
            if !self.is_room(&p.room) {
                return Err(config_error(format!("block {b} is in unknown room {}", p.room)));
            }
            if Some(&p.room) == self.blocked_room.as_ref() {
                return Err(config_error(format!("block {b} is in blocked room {}", p.room)));
            }
        }
        if self.target_colors.is_empty() {
            return Err(config_error("at least one target color is required"));
        }
        let distinct: BTreeSet<&String> = self.target_colors.iter().collect();
        if distinct.len() != self.target_colors.len() {
            return Err(config_error("target colors repeat"));
        }
        for c in &self.target_colors {
            let n = self.blocks.values().filter(|p| &p.color == c).count();
            if n != 1 {
                return Err(config_error(format!(
                    "target color {c} is carried by {n} blocks, expected one"
                )));
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
            agent(&self.designated, "designated agent")?;
            let b = self
                .blocked_room
                .as_ref()
                .ok_or_else(|| config_error("S5 needs a blocked room"))?;
            if !self.is_room(b) {
                return Err(config_error(format!("blocked room {b} is not a room")));
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

    /// Corridor adjacency: `dz - r1 - r2 - ... - rN`.
    fn next_to(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for i in 1..=self.rooms {
            let prev = if i == 1 { DROP_ZONE.to_string() } else { room(i - 1) };
            out.push((prev.clone(), room(i)));
            if i > 1 {
                out.push((room(i), prev));
            }
        }
        out
    }
}

fn domain_text(scenario: Scenario) -> String {
    let blocked = scenario == Scenario::BlockedCells;
    let mut predicates = String::from(
        "(at ?a - agent ?p - place)
    (searcher ?a - agent)
    (observed ?p - place)
    (blockin ?b - block ?p - place)
    (holding ?a - agent ?b - block)
    (taken ?b - block)
    (handempty ?a - agent)
    (hascolor ?b - block ?c - color)
    (wanted ?b - block)
    (awaiting ?c - color)
    (nextcolor ?c ?n - color)",
    );
    if blocked {
        predicates.push_str("\n    (blocked ?r - room)\n    (nextto ?p - place ?r - room)");
    }
    if scenario.has_commander() {
        predicates.push_str("\n    (commander ?a - agent)\n    (commandpost ?p - place)");
    }
    if scenario == Scenario::CommanderNonBroadcast {
        predicates.push_str("\n    (liaison ?a - agent)");
    }

    let go_guard = if blocked { " (not (blocked ?to))" } else { "" };
    let reveal = if blocked {
        "
      (forall (?r - room) (when (and (nextto ?p ?r) (blocked ?r)) [?a](blocked ?r)))
      (forall (?r - room) (when (and (nextto ?p ?r) (not (blocked ?r))) [?a](not (blocked ?r))))"
    } else {
        ""
    };
    let comm = if scenario == Scenario::CommanderNonBroadcast {
        "(:action commblock
    :derive-condition always
    :parameters (?p - place ?a - agent ?b - block ?c - agent)
    :precondition (and (liaison ?a) (commander ?c) (at ?a ?p) [?a](blockin ?b ?p))
    :effect (and [?c](blockin ?b ?p)))"
    } else {
        "(:action commblock
    :derive-condition always
    :parameters (?p - place ?a - agent ?b - block)
    :precondition (and (at ?a ?p) [?a](blockin ?b ?p))
    :effect (and (forall (?g - agent) [?g](blockin ?b ?p))))"
    };

    format!(
        "; BW4T retrieval task, scenario {scenario}
(define (domain bw4t)
  (:requirements :typing :conditional-effects)
  (:types room dropzone - place
          place agent block color)
  (:predicates
    {predicates})

  (:action goto
    :derive-condition always
    :parameters (?a - agent ?from - place ?to - room)
    :precondition (and (searcher ?a) (at ?a ?from) (not (at ?a ?to)){go_guard})
    :effect (and (at ?a ?to) (not (at ?a ?from))))

  (:action gotodrop
    :derive-condition always
    :parameters (?a - agent ?from - room ?d - dropzone)
    :precondition (and (searcher ?a) (at ?a ?from))
    :effect (and (at ?a ?d) (not (at ?a ?from))))

  (:action pickup
    :derive-condition always
    :parameters (?a - agent ?b - block ?r - room)
    :precondition (and (searcher ?a) (at ?a ?r) (handempty ?a) (wanted ?b) (not (taken ?b)) (blockin ?b ?r) [?a](blockin ?b ?r))
    :effect (and (holding ?a ?b) (not (handempty ?a)) (taken ?b)))

  (:action putdown
    :derive-condition always
    :parameters (?a - agent ?b - block ?c - color ?d - dropzone)
    :precondition (and (at ?a ?d) (holding ?a ?b) (hascolor ?b ?c) (awaiting ?c))
    :effect (and (not (holding ?a ?b)) (handempty ?a) (blockin ?b ?d) [?a](blockin ?b ?d) (not (awaiting ?c))
      (forall (?n - color) (when (nextcolor ?c ?n) (awaiting ?n)))))

  (:action observe
    :derive-condition always
    :parameters (?a - agent ?p - place)
    :precondition (and (searcher ?a) (at ?a ?p))
    :effect (and (observed ?p) [?a](observed ?p)
      (forall (?b - block) (when (blockin ?b ?p) [?a](blockin ?b ?p)))
      (forall (?b - block) (when (not (blockin ?b ?p)) [?a](not (blockin ?b ?p)))){reveal}))

  {comm})
"
    )
}

/// Generates the BW4T domain, problem and ground truth for `c`.
pub fn bw4t(c: &Bw4tConfig) -> Result<GeneratedTask, DomainError> {
    c.check()?;
    let domain = apply_comm_model(&parse_domain(&domain_text(c.scenario))?, c.model, c.scenario)?;

    let rooms: Vec<String> = (1..=c.rooms).map(room).collect();
    let mut objects: Vec<TypedName> = rooms.iter().map(|r| TypedName::new(r, "room")).collect();
    objects.push(TypedName::new(DROP_ZONE, "dropzone"));
    objects.extend(c.agents.iter().map(|a| TypedName::new(a, "agent")));
    objects.extend(c.blocks.keys().map(|b| TypedName::new(b, "block")));
    let mut colors: Vec<&String> = c.target_colors.iter().collect();
    for p in c.blocks.values() {
        if !colors.contains(&&p.color) {
            colors.push(&p.color);
        }
    }
    objects.extend(colors.iter().map(|k| TypedName::new(*k, "color")));

    let mut init = Vec::new();
    for a in &c.agents {
        init.push(rml(&format!("(at {a} {})", c.agent_starts[a])));
    }
    for a in c.searchers() {
        init.push(rml(&format!("(searcher {a})")));
        init.push(rml(&format!("(handempty {a})")));
    }
    let mut truth: Vec<Rml> = c
        .blocks
        .iter()
        .map(|(b, p)| rml(&format!("(blockin {b} {})", p.room)))
        .collect();
    truth.extend(c.blocked_room.iter().map(|r| rml(&format!("(blocked {r})"))));
    init.extend(truth.iter().cloned());
    let targets: Vec<&String> = c
        .target_colors
        .iter()
        .map(|k| c.blocks.iter().find(|(_, p)| &p.color == k).map(|(b, _)| b).unwrap())
        .collect();
    for (b, p) in &c.blocks {
        init.push(rml(&format!("(hascolor {b} {})", p.color)));
    }
    for b in &targets {
        init.push(rml(&format!("(wanted {b})")));
    }
    init.push(rml(&format!("(awaiting {})", c.target_colors[0])));
    for w in c.target_colors.windows(2) {
        init.push(rml(&format!("(nextcolor {} {})", w[0], w[1])));
    }
    if c.scenario == Scenario::BlockedCells {
        for (p, r) in c.next_to() {
            init.push(rml(&format!("(nextto {p} {r})")));
        }
    }
    if let Some(cmd) = c.commander.as_ref().filter(|_| c.scenario.has_commander()) {
        init.push(rml(&format!("(commander {cmd})")));
        init.push(rml(&format!("(commandpost {})", c.agent_starts[cmd])));
    }
    if let (Scenario::CommanderNonBroadcast, Some(l)) = (c.scenario, &c.liaison) {
        init.push(rml(&format!("(liaison {l})")));
    }

    let delivered = |b: &str| Fluent::new("blockin", [b, DROP_ZONE]);
    let deliveries = targets.iter().map(|b| Rml::pos(delivered(b)));
    let delivery_beliefs =
        |a: &str| -> Vec<Rml> { targets.iter().map(|b| Rml::pos(delivered(b)).believed_by(a)).collect() };
    let conjuncts: Vec<Rml> = match c.scenario {
        Scenario::EpistemicGoal => deliveries
            .chain(c.agents.iter().flat_map(|a| delivery_beliefs(a)))
            .collect(),
        Scenario::NonEpistemicGoal => deliveries.collect(),
        Scenario::CommanderBroadcast | Scenario::CommanderNonBroadcast => {
            let cmd = c.commander.as_deref().unwrap();
            deliveries.chain(delivery_beliefs(cmd)).collect()
        }
        Scenario::BlockedCells => {
            let d = c.designated.as_deref().unwrap();
            let r = c.blocked_room.as_deref().unwrap();
            deliveries
                .chain(std::iter::once(rml(&format!("(blocked {r})")).believed_by(d)))
                .collect()
        }
    };

    let problem = ProblemSpec {
        name: format!("bw4t-rooms{}-{}-{}", c.rooms, c.scenario, c.model),
        domain: domain.name.clone(),
        objects,
        init,
        goal: GoalFormula { conjuncts },
    };
    Ok(GeneratedTask {
        domain,
        problem,
        ground_truth: GroundTruth {
            domain: "bw4t".into(),
            facts: truth,
        },
    })
}
