use std::collections::BTreeMap;

use epcomm::belief::{BeliefState, DepthBound, Rml};
use epcomm::compiler::{compile, ground, CompileOptions};
use epcomm::domains::*;
use epcomm::epddl::{parse_domain, parse_problem, render_domain, render_problem, validate};
use epcomm::search::{solve, validate_plan, Limits, Strategy};

fn grid(w: usize, h: usize, n: usize, s: Scenario, m: CommModel) -> GeneratedTask {
    gridworld(&GridworldConfig::seeded(w, h, n, s, m, 7).unwrap()).unwrap()
}

fn rooms(r: usize, n: usize, s: Scenario, m: CommModel) -> GeneratedTask {
    bw4t(&Bw4tConfig::seeded(r, n, s, m, 7).unwrap()).unwrap()
}

fn all_tasks() -> Vec<(String, GeneratedTask)> {
    let mut out = Vec::new();
    for s in Scenario::ALL {
        for m in CommModel::ALL {
            out.push((format!("grid {s} {m}"), grid(3, 3, 3, s, m)));
            out.push((format!("bw4t {s} {m}"), rooms(3, 3, s, m)));
        }
    }
    out
}

#[test]
fn every_generated_pair_validates_and_round_trips() {
    for (name, t) in all_tasks() {
        let diags = validate(&t.domain, &t.problem, DepthBound::default());
        assert!(diags.is_empty(), "{name}: {diags:?}");
        let d = parse_domain(&render_domain(&t.domain)).unwrap();
        let p = parse_problem(&render_problem(&t.problem)).unwrap();
        assert_eq!(d, t.domain, "{name}");
        assert_eq!(p, t.problem, "{name}");
    }
}

#[test]
fn ground_truth_is_hidden_from_initial_beliefs() {
    for (name, t) in all_tasks() {
        assert!(t.problem.init.iter().all(|l| l.depth() == 0), "{name}");
        let mut all = t.problem.init.clone();
        all.extend(t.ground_truth.facts.iter().cloned());
        assert!(BeliefState::from_literals(all).is_ok(), "{name}");
        for f in &t.ground_truth.facts {
            assert!(t.problem.init.contains(f), "{name}: {f}");
        }
    }
}

#[test]
fn gridworld_3x3_counts() {
    let t = grid(3, 3, 3, Scenario::EpistemicGoal, CommModel::Selective);
    assert_eq!(t.problem.objects.iter().filter(|o| o.ty == "pos").count(), 9);
    let actions = ground(&t.domain, &t.problem).unwrap();
    // every position, speaker and survivor
    assert_eq!(actions.iter().filter(|a| a.name == "commsurvivor").count(), 81);
    let observed = t
        .problem
        .goal
        .conjuncts
        .iter()
        .filter(|g| g.depth() == 0 && g.fluent.predicate == "observed")
        .count();
    let beliefs = t.problem.goal.conjuncts.iter().filter(|g| g.depth() == 1).count();
    assert_eq!((observed, beliefs), (9, 9));

    let t = grid(4, 3, 4, Scenario::NonEpistemicGoal, CommModel::Selective);
    assert_eq!(t.problem.objects.iter().filter(|o| o.ty == "pos").count(), 12);
    assert_eq!(t.problem.goal.conjuncts.len(), 12);
}

#[test]
fn scenario_goals_have_the_documented_shape() {
    let t = grid(3, 3, 3, Scenario::CommanderBroadcast, CommModel::Selective);
    let believers: Vec<&str> = t
        .problem
        .goal
        .conjuncts
        .iter()
        .filter_map(|g| g.outer_agent())
        .collect();
    assert_eq!(believers, vec!["a3"; 3]);
    assert!(!t.problem.init.iter().any(|l| l.to_string() == "(searcher a3)"));

    let t = grid(3, 3, 3, Scenario::BlockedCells, CommModel::Selective);
    let goal: Vec<String> = t.problem.goal.conjuncts.iter().map(|g| g.to_string()).collect();
    assert_eq!(goal.len(), 2);
    assert!(goal[0].starts_with("(at a1 "));
    assert!(goal[1].starts_with("[a1](survivorat s1 "));
    assert_eq!(
        t.ground_truth
            .facts
            .iter()
            .filter(|f| f.fluent.predicate == "blocked")
            .count(),
        2
    );

    let t = rooms(6, 4, Scenario::EpistemicGoal, CommModel::Selective);
    assert_eq!(t.problem.goal.conjuncts.len(), 2 + 2 * 4);
    let t = rooms(3, 3, Scenario::BlockedCells, CommModel::Selective);
    let last = t.problem.goal.conjuncts.last().unwrap().to_string();
    assert!(last.starts_with("[a1](blocked r"), "{last}");
}

#[test]
fn nocomm_removes_or_pins_communication() {
    for s in [
        Scenario::EpistemicGoal,
        Scenario::NonEpistemicGoal,
        Scenario::BlockedCells,
    ] {
        let t = grid(3, 3, 3, s, CommModel::NoComm);
        assert!(t.domain.actions.iter().all(|a| !is_comm_action(&a.name)), "{s}");
        let t = rooms(3, 3, s, CommModel::NoComm);
        assert!(t.domain.actions.iter().all(|a| !is_comm_action(&a.name)), "{s}");
    }
    for s in [Scenario::CommanderBroadcast, Scenario::CommanderNonBroadcast] {
        let t = grid(3, 3, 3, s, CommModel::NoComm);
        assert!(t.domain.actions.iter().all(|a| !is_comm_action(&a.name)), "{s}");
        let debrief = t.domain.action("debriefsurvivor").unwrap();
        assert!(debrief.precondition.iter().any(|l| l.atom.predicate == "commandpost"));
        // the speaker stands on the post, which is the commander's cell, and
        // the commander acts and is the only one to learn anything
        let post = t
            .problem
            .init
            .iter()
            .find(|l| l.fluent.predicate == "commandpost")
            .unwrap()
            .fluent
            .args[0]
            .clone();
        let grounded = ground(&t.domain, &t.problem).unwrap();
        let debriefs: Vec<_> = grounded.iter().filter(|a| a.name == "debriefsurvivor").collect();
        assert!(!debriefs.is_empty());
        for a in &debriefs {
            assert_eq!(a.args.last(), Some(&post), "{s}");
            assert_eq!(a.actor.as_deref(), Some("a3"));
            assert_eq!(a.effects.len(), 1);
            assert!(a.effects[0].adds.iter().all(|l| l.outer_agent() == Some("a3")));
        }
        let t = rooms(3, 3, s, CommModel::NoComm);
        assert!(t.domain.action("debriefblock").is_some(), "{s}");
    }
}

#[test]
fn selective_is_identity() {
    let text = "(define (domain d) (:types pos agent)
        (:predicates (at ?a - agent ?p - pos))
        (:action commat :derive-condition always :parameters (?a - agent ?p - pos)
          :precondition (and (at ?a ?p)) :effect (and (forall (?g - agent) [?g](at ?a ?p)))))";
    let d = parse_domain(text).unwrap();
    for s in Scenario::ALL {
        assert_eq!(apply_comm_model(&d, CommModel::Selective, s).unwrap(), d);
    }
}

#[test]
fn commall_broadcasts_every_observation() {
    let t = grid(3, 3, 3, Scenario::EpistemicGoal, CommModel::CommAll);
    assert!(t.domain.actions.iter().all(|a| !is_comm_action(&a.name)));
    let actions = ground(&t.domain, &t.problem).unwrap();
    let obs = actions.iter().find(|a| a.name == "observe").unwrap();
    let observed_believers: Vec<&str> = obs
        .effects
        .iter()
        .flat_map(|e| &e.adds)
        .filter(|l| l.fluent.predicate == "observed")
        .filter_map(|l| l.outer_agent())
        .collect();
    assert_eq!(observed_believers.len(), 1 + 3);
    for a in ["a1", "a2", "a3"] {
        assert!(observed_believers.contains(&a));
    }

    // S4: only the liaison reaches the commander
    let t = grid(3, 3, 3, Scenario::CommanderNonBroadcast, CommModel::CommAll);
    let obs = t.domain.action("observe").unwrap();
    let copies: Vec<_> = obs
        .effects
        .iter()
        .filter(|e| e.quantifiers.iter().any(|q| q.name == "g"))
        .collect();
    assert!(!copies.is_empty());
    for e in copies {
        let guard: Vec<&str> = e.guard.iter().map(|l| l.atom.predicate.as_str()).collect();
        assert!(guard.contains(&"liaison") && guard.contains(&"commander"));
    }
}

#[test]
fn comm_model_errors_without_a_comm_action() {
    let text = "(define (domain d) (:types pos agent)
        (:predicates (at ?a - agent ?p - pos))
        (:action look :derive-condition always :parameters (?a - agent ?p - pos)
          :precondition (and (at ?a ?p)) :effect (and [?a](at ?a ?p))))";
    let d = parse_domain(text).unwrap();
    for m in [CommModel::NoComm, CommModel::CommAll] {
        assert!(matches!(
            apply_comm_model(&d, m, Scenario::EpistemicGoal),
            Err(DomainError::CommModel { .. })
        ));
    }
}

#[test]
fn seeded_layouts_are_reproducible() {
    for s in Scenario::ALL {
        let a = GridworldConfig::seeded(4, 3, 4, s, CommModel::Selective, 11).unwrap();
        let b = GridworldConfig::seeded(4, 3, 4, s, CommModel::Selective, 11).unwrap();
        assert_eq!(a, b);
        let a = Bw4tConfig::seeded(6, 4, s, CommModel::Selective, 11).unwrap();
        let b = Bw4tConfig::seeded(6, 4, s, CommModel::Selective, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.blocks.len(), 4);
        assert_eq!(a.target_colors.len(), 2);
    }
}

#[test]
fn unsolvable_gridworld_configs_are_rejected() {
    let mut c = GridworldConfig::seeded(3, 3, 1, Scenario::BlockedCells, CommModel::Selective, 1).unwrap();
    let s = c.survivors.values().next().unwrap().clone();
    c.blocked[0] = s;
    assert!(matches!(gridworld(&c), Err(DomainError::Config(_))));

    // a corner target walled in by both of its neighbours
    let c = GridworldConfig {
        width: 3,
        height: 3,
        agents: vec!["a1".into()],
        agent_starts: BTreeMap::from([("a1".into(), "p5".into())]),
        survivors: BTreeMap::from([("s1".into(), "p5".into())]),
        blocked: vec!["p2".into(), "p4".into()],
        scenario: Scenario::BlockedCells,
        model: CommModel::Selective,
        commander: None,
        liaison: None,
        designated: Some("a1".into()),
        target: Some("p1".into()),
    };
    let err = gridworld(&c).unwrap_err().to_string();
    assert!(err.contains("unreachable"), "{err}");
}

#[test]
fn bw4t_rejects_deliveries_that_start_satisfied() {
    let c = Bw4tConfig {
        rooms: 1,
        blocks: BTreeMap::from([(
            "b1".into(),
            BlockPlacement {
                room: DROP_ZONE.into(),
                color: "red".into(),
            },
        )]),
        target_colors: vec!["red".into()],
        agents: vec!["a1".into()],
        agent_starts: BTreeMap::from([("a1".into(), DROP_ZONE.into())]),
        blocked_room: None,
        scenario: Scenario::NonEpistemicGoal,
        model: CommModel::Selective,
        commander: None,
        liaison: None,
        designated: None,
    };
    assert!(matches!(bw4t(&c), Err(DomainError::Config(_))));

    let mut c = Bw4tConfig::seeded(3, 1, Scenario::NonEpistemicGoal, CommModel::Selective, 3).unwrap();
    c.target_colors = vec!["purple".into(), c.target_colors[0].clone()];
    assert!(matches!(bw4t(&c), Err(DomainError::Config(_))));
}

#[test]
fn bw4t_single_agent_plan_pattern() {
    let place = |room: &str, color: &str| BlockPlacement {
        room: room.into(),
        color: color.into(),
    };
    let c = Bw4tConfig {
        rooms: 3,
        blocks: BTreeMap::from([
            ("b1".into(), place("r2", "red")),
            ("b2".into(), place("r2", "blue")),
            ("b3".into(), place("r1", "green")),
            ("b4".into(), place("r3", "yellow")),
        ]),
        target_colors: vec!["red".into(), "blue".into()],
        agents: vec!["a1".into()],
        agent_starts: BTreeMap::from([("a1".into(), DROP_ZONE.into())]),
        blocked_room: None,
        scenario: Scenario::NonEpistemicGoal,
        model: CommModel::Selective,
        commander: None,
        liaison: None,
        designated: None,
    };
    let t = bw4t(&c).unwrap();
    let task = compile(&t.domain, &t.problem, CompileOptions::default()).unwrap();
    let plan = solve(&task, Strategy::Bfs, Limits::default()).unwrap();
    let names: Vec<&str> = plan
        .labels()
        .into_iter()
        .map(|l| l.trim_start_matches('(').split(' ').next().unwrap())
        .collect();
    assert_eq!(
        names,
        ["goto", "observe", "pickup", "gotodrop", "putdown", "goto", "pickup", "gotodrop", "putdown"]
    );
    assert!(plan.labels()[2].contains("b1"));
    assert!(validate_plan(&task, &plan).valid);
    let goal: Vec<Rml> = task.goal_literals();
    assert_eq!(goal.len(), 2);
}
