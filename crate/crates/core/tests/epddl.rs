use epcomm::belief::{DepthBound, Fluent, Rml};
use epcomm::epddl::*;

const LISTING: &str = r#"
(:action commsurvivor
  :derive-condition  always
  :parameters        (?p - pos ?a - agent  ?s
                      - survivor)
  :precondition      (and (at ?a ?p) [?a]
                        (survivorat ?s ?p))
  :effect            (and (forall ?g - agent
                        [?g](survivorat ?s ?p
                     )))
)
; ...
"#;

fn listing_domain() -> String {
    format!(
        "(define (domain gridworld)
           (:types pos agent survivor)
           (:predicates (at ?a - agent ?p - pos) (survivorat ?s - survivor ?p - pos))
           {LISTING})"
    )
}

fn problem_text() -> &'static str {
    "(define (problem p1) (:domain gridworld)
       (:objects p1 p2 - pos a1 a2 - agent s1 - survivor)
       (:init (at a1 p1) (survivorat s1 p2) [a1](not (survivorat s1 p1)))
       (:goal (and [a2](survivorat s1 p2) (not [a1](at a2 p1)))))"
}

fn var(v: &str) -> Term {
    Term::Var(v.into())
}

#[test]
fn listing_parses_to_documented_schema() {
    let d = parse_domain(&listing_domain()).unwrap();
    let a = d.action("commsurvivor").unwrap();
    assert_eq!(a.derive_condition, DeriveCondition::Always);
    assert_eq!(
        a.parameters,
        vec![
            TypedName::new("p", "pos"),
            TypedName::new("a", "agent"),
            TypedName::new("s", "survivor")
        ]
    );
    assert_eq!(a.precondition.len(), 2);
    assert_eq!(a.precondition[0].atom.predicate, "at");
    assert_eq!(a.precondition[0].atom.args, vec![var("a"), var("p")]);
    assert!(a.precondition[0].chain.is_empty());
    assert_eq!(a.precondition[1].chain.len(), 1);
    assert_eq!(a.precondition[1].chain[0].agent, var("a"));
    assert!(!a.precondition[1].chain[0].negated);
    assert_eq!(a.precondition[1].atom.args, vec![var("s"), var("p")]);

    assert_eq!(a.effects.len(), 1);
    let e = &a.effects[0];
    assert_eq!(e.quantifiers, vec![TypedName::new("g", "agent")]);
    assert!(e.guard.is_empty());
    assert_eq!(e.literals.len(), 1);
    assert_eq!(e.literals[0].chain[0].agent, var("g"));
    assert_eq!(e.literals[0].atom.predicate, "survivorat");
}

#[test]
fn listing_round_trips() {
    let d = parse_domain(&listing_domain()).unwrap();
    let text = render_domain(&d);
    assert_eq!(parse_domain(&text).unwrap(), d);
}

#[test]
fn empty_domain() {
    let d = parse_domain("(define (domain e) (:types agent))").unwrap();
    assert!(d.actions.is_empty());
    let text = render_domain(&d);
    assert_eq!(parse_domain(&text).unwrap(), d);
}

#[test]
fn unbalanced_parenthesis_names_open_position() {
    let err = parse_domain("(define (domain e)\n  (:types agent)\n  (:predicates (p)").unwrap_err();
    match err {
        EpddlError::Unclosed { open } => assert_eq!((open.line, open.col), (3, 3)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn keywords_are_case_insensitive() {
    let d = parse_domain(
        "(DEFINE (DOMAIN x) (:TYPES agent) (:PREDICATES (p))
           (:ACTION go :DERIVE-CONDITION ALWAYS :PARAMETERS (?a - agent) :PRECONDITION (AND) :EFFECT (AND (p))))",
    )
    .unwrap();
    assert_eq!(d.actions[0].effects[0].literals[0].atom.predicate, "p");
}

#[test]
fn derive_condition_other_than_always_is_rejected() {
    let err = parse_domain(
        "(define (domain x) (:types agent) (:predicates (p))
           (:action go :derive-condition never :parameters () :precondition (and) :effect (p)))",
    )
    .unwrap_err();
    assert!(matches!(err, EpddlError::DeriveCondition { ref value, .. } if value == "never"));
}

#[test]
fn missing_derive_condition_is_rejected() {
    let err = parse_domain(
        "(define (domain x) (:types agent) (:predicates (p))
           (:action go :parameters () :precondition (and) :effect (p)))",
    )
    .unwrap_err();
    assert!(matches!(err, EpddlError::Syntax { .. }));
}

#[test]
fn undeclared_type_and_arity_errors() {
    let err = parse_domain("(define (domain x) (:types agent) (:predicates (p ?x - thing)))").unwrap_err();
    assert!(matches!(err, EpddlError::UndeclaredType { ref name, .. } if name == "thing"));

    let err = parse_domain(
        "(define (domain x) (:types agent) (:predicates (p ?a - agent))
           (:action go :derive-condition always :parameters (?a - agent) :precondition (p ?a ?a) :effect (p ?a)))",
    )
    .unwrap_err();
    assert!(matches!(
        err,
        EpddlError::Arity {
            expected: 1,
            found: 2,
            ..
        }
    ));
}

#[test]
fn missing_agent_type_is_rejected() {
    assert!(parse_domain("(define (domain x) (:types pos))").is_err());
}

#[test]
fn duplicate_actions_are_rejected() {
    let a = "(:action go :derive-condition always :parameters () :precondition (and) :effect (p))";
    let err = parse_domain(&format!("(define (domain x) (:types agent) (:predicates (p)) {a} {a})")).unwrap_err();
    assert!(matches!(err, EpddlError::DuplicateAction { .. }));
}

#[test]
fn init_conflict_is_reported() {
    let err = parse_problem(
        "(define (problem c) (:domain g) (:objects s1 - survivor p1 - pos)
           (:init (survivorat s1 p1) (not (survivorat s1 p1))) (:goal (survivorat s1 p1)))",
    )
    .unwrap_err();
    match err {
        EpddlError::InitConflict { first, second, .. } => {
            assert_eq!(first.to_string(), "(survivorat s1 p1)");
            assert_eq!(second.to_string(), "!(survivorat s1 p1)");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn minimal_problem() {
    let p = parse_problem("(define (problem m) (:domain d) (:objects a - agent) (:init (ready a)) (:goal (ready a)))")
        .unwrap();
    let ready = Rml::pos(Fluent::new("ready", ["a"]));
    assert_eq!(p.init, vec![ready.clone()]);
    assert_eq!(p.goal.conjuncts, vec![ready]);
}

#[test]
fn problem_round_trips_with_negated_beliefs() {
    let p = parse_problem(problem_text()).unwrap();
    assert_eq!(p.goal.conjuncts[1].to_string(), "![a1](at a2 p1)");
    assert_eq!(p.init[2].to_string(), "[a1]!(survivorat s1 p1)");
    assert_eq!(parse_problem(&render_problem(&p)).unwrap(), p);
}

#[test]
fn effect_structure_survives_round_trip() {
    let d = parse_domain(
        "(define (domain x) (:types agent pos)
           (:predicates (p ?x - pos) (q ?a - agent ?x - pos) (r))
           (:action act :derive-condition always :parameters (?a - agent ?x - pos)
             :precondition (and (p ?x) (not [?a](r)))
             :effect (and (r) (not (p ?x))
                          (and (q ?a ?x))
                          (when (and (p ?x) (r)) [?a](not (r)))
                          (forall (?b - agent ?y - pos) (when (q ?b ?y) (and [?b](q ?b ?y) (not [?a](p ?y)))))
                          (forall ?b - agent (forall ?y - pos [?b](p ?y))))))",
    )
    .unwrap();
    let e = &d.actions[0].effects;
    assert_eq!(e.len(), 5);
    assert_eq!(e[0].literals.len(), 2);
    assert_eq!(e[1].literals.len(), 1);
    assert_eq!(e[2].guard.len(), 2);
    assert_eq!(e[3].quantifiers.len(), 2);
    assert_eq!(e[4].quantifiers.len(), 2);
    assert!(d.actions[0].precondition[1].chain[0].negated);
    assert_eq!(parse_domain(&render_domain(&d)).unwrap(), d);
}

#[test]
fn validate_clean_pair() {
    let d = parse_domain(&listing_domain()).unwrap();
    let p = parse_problem(problem_text()).unwrap();
    assert_eq!(validate(&d, &p, DepthBound::default()), vec![]);
}

#[test]
fn validate_unresolved_goal_object() {
    let d = parse_domain(&listing_domain()).unwrap();
    let mut p = parse_problem(problem_text()).unwrap();
    p.goal.conjuncts.push(Rml::pos(Fluent::new("at", ["a1", "p99"])));
    let diags = validate(&d, &p, DepthBound::default());
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].category, DiagnosticCategory::UnresolvedObject);
    assert!(diags[0].location.starts_with("goal"));
}

#[test]
fn validate_chain_variable_of_wrong_type() {
    let text = listing_domain().replace("?g - agent", "?g - pos");
    let d = parse_domain(&text).unwrap();
    let p = parse_problem(problem_text()).unwrap();
    let diags = validate(&d, &p, DepthBound::default());
    assert_eq!(diags.len(), 1, "{diags:?}");
    assert_eq!(diags[0].category, DiagnosticCategory::ChainType);
}

#[test]
fn validate_reports_depth_and_domain_mismatch() {
    let d = parse_domain(&listing_domain()).unwrap();
    let mut p = parse_problem(problem_text()).unwrap();
    p.domain = "other".into();
    p.goal.conjuncts.push(
        Rml::pos(Fluent::new("at", ["a1", "p1"]))
            .believed_by("a2")
            .believed_by("a1"),
    );
    let cats: Vec<_> = validate(&d, &p, DepthBound::default())
        .into_iter()
        .map(|d| d.category)
        .collect();
    assert_eq!(
        cats,
        vec![DiagnosticCategory::DomainMismatch, DiagnosticCategory::DepthBound]
    );
    assert!(validate(&d, &p, DepthBound::new(2).unwrap())
        .iter()
        .all(|d| d.category != DiagnosticCategory::DepthBound));
}

#[test]
fn validate_flags_unbound_variables_and_argument_types() {
    let d = parse_domain(
        "(define (domain gridworld) (:types pos agent survivor)
           (:predicates (at ?a - agent ?p - pos))
           (:action bad :derive-condition always :parameters (?s - survivor)
             :precondition (at ?s ?q) :effect (at ?s ?q)))",
    )
    .unwrap();
    let p = parse_problem(
        "(define (problem p1) (:domain gridworld)
           (:objects p1 - pos a1 - agent s1 - survivor)
           (:init (at a1 p1)) (:goal (at a1 p1)))",
    )
    .unwrap();
    let cats: Vec<_> = validate(&d, &p, DepthBound::default())
        .into_iter()
        .map(|d| d.category)
        .collect();
    assert_eq!(
        cats,
        vec![
            DiagnosticCategory::ArgumentType,
            DiagnosticCategory::UnboundVariable,
            DiagnosticCategory::ArgumentType,
            DiagnosticCategory::UnboundVariable
        ]
    );
}

#[test]
fn parsing_never_panics_on_truncations() {
    let text = listing_domain();
    for end in 0..text.len() {
        if text.is_char_boundary(end) {
            let _ = parse_domain(&text[..end]);
            let _ = parse_problem(&text[..end]);
        }
    }
}

mod fuzz {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn parse_is_total(s in "[()\\[\\]a-z?:; \\n-]{0,80}") {
            let _ = parse_domain(&s);
            let _ = parse_problem(&s);
        }
    }
}
