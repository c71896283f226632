use crate::epddl::{
    ActionSchema, AtomTemplate, DomainSpec, EffectItem, LiteralTemplate, ModalityTemplate, Pos, Term, TypedName,
};

use super::{CommModel, DomainError, Scenario};

/// Communication actions are recognised by name.
pub fn is_comm_action(name: &str) -> bool {
    name.starts_with("comm")
}

fn actor_var(a: &ActionSchema, d: &DomainSpec) -> Option<String> {
    a.parameters
        .iter()
        .find(|t| d.is_subtype(&t.ty, "agent"))
        .map(|t| t.name.clone())
}

fn fresh_var(a: &ActionSchema, base: &str) -> String {
    let taken = |v: &str| {
        a.parameters.iter().any(|t| t.name == v) || a.effects.iter().flat_map(|e| &e.quantifiers).any(|t| t.name == v)
    };
    let mut name = base.to_string();
    let mut k = 1;
    while taken(&name) {
        k += 1;
        name = format!("{base}{k}");
    }
    name
}

fn plain(predicate: &str, args: &[&str]) -> LiteralTemplate {
    LiteralTemplate {
        chain: Vec::new(),
        atom: AtomTemplate {
            predicate: predicate.into(),
            args: args.iter().map(|v| Term::Var(v.to_string())).collect(),
        },
        negated: false,
        pos: Pos::default(),
    }
}

fn rename(t: &mut Term, from: &str, to: &str) {
    if *t == Term::Var(from.into()) {
        *t = Term::Var(to.into());
    }
}

fn substitute(l: &LiteralTemplate, from: &str, to: &str) -> LiteralTemplate {
    let mut l = l.clone();
    for m in &mut l.chain {
        rename(&mut m.agent, from, to);
    }
    for t in &mut l.atom.args {
        rename(t, from, to);
    }
    l
}

/// The in-person form of a communication action: the speaker stands on the
/// command post and the commander, as the acting agent, takes in what the
/// speaker believes. Only the commander's beliefs change.
fn debrief(a: &ActionSchema, d: &DomainSpec, post_type: &str) -> Result<ActionSchema, &'static str> {
    let speaker = actor_var(a, d).ok_or("communication action without an agent parameter")?;
    let mut out = a.clone();
    out.name = format!("debrief{}", a.name.strip_prefix("comm").unwrap_or(&a.name));

    let existing = a.precondition.iter().find_map(|l| match l.atom.args.as_slice() {
        [Term::Var(v)] if l.chain.is_empty() && !l.negated && l.atom.predicate == "commander" => Some(v.clone()),
        _ => None,
    });
    let cmd = match existing {
        Some(v) => v,
        None => {
            let v = fresh_var(a, "cmd");
            out.parameters.push(TypedName::new(v.clone(), "agent"));
            out.precondition.push(plain("commander", &[&v]));
            v
        }
    };
    let i = out.parameters.iter().position(|t| t.name == cmd).unwrap();
    let c = out.parameters.remove(i);
    out.parameters.insert(0, c);

    let post = fresh_var(a, "post");
    let at = out
        .precondition
        .iter_mut()
        .find(|l| {
            l.chain.is_empty()
                && !l.negated
                && l.atom.predicate == "at"
                && l.atom.args.first() == Some(&Term::Var(speaker.clone()))
        })
        .ok_or("communication action does not locate its sender")?;
    at.atom.args[1] = Term::Var(post.clone());
    out.precondition.push(plain("commandpost", &[&post]));
    out.precondition.push(plain("at", &[&cmd, &post]));
    out.parameters.push(TypedName::new(post, post_type));

    out.effects = Vec::new();
    for item in &a.effects {
        // broadcast receivers collapse onto the commander
        let receivers: Vec<String> = item
            .quantifiers
            .iter()
            .filter(|t| d.is_subtype(&t.ty, "agent"))
            .filter(|t| {
                item.literals
                    .iter()
                    .any(|l| l.chain.first().is_some_and(|m| m.agent == Term::Var(t.name.clone())))
            })
            .map(|t| t.name.clone())
            .collect();
        let mut guard = item.guard.clone();
        let mut literals = item.literals.clone();
        for r in &receivers {
            guard = guard.iter().map(|g| substitute(g, r, &cmd)).collect();
            literals = literals.iter().map(|l| substitute(l, r, &cmd)).collect();
        }
        literals.retain(|l| l.chain.first().is_some_and(|m| m.agent == Term::Var(cmd.clone())));
        if !literals.is_empty() {
            out.effects.push(EffectItem {
                quantifiers: item
                    .quantifiers
                    .iter()
                    .filter(|t| !receivers.contains(&t.name))
                    .cloned()
                    .collect(),
                guard,
                literals,
            });
        }
    }
    if out.effects.is_empty() {
        return Err("communication action informs nobody");
    }
    Ok(out)
}

/// Rewrites a Selective domain into one of the baselines.
///
/// * Selective: unchanged.
/// * NoComm: communication actions are dropped. In commander scenarios they
///   become debriefings at the command post, taken by the commander.
/// * CommAll: communication actions are dropped and every other action that
///   gives its actor a belief also gives it to every agent the scenario's
///   communication action could reach.
pub fn apply_comm_model(d: &DomainSpec, model: CommModel, scenario: Scenario) -> Result<DomainSpec, DomainError> {
    let fail = |reason: &str| DomainError::CommModel {
        model,
        scenario,
        reason: reason.into(),
    };
    let comm: Vec<&ActionSchema> = d.actions.iter().filter(|a| is_comm_action(&a.name)).collect();
    match model {
        CommModel::Selective => Ok(d.clone()),
        CommModel::NoComm if scenario.has_commander() => {
            if comm.is_empty() {
                return Err(fail("the domain has no communication action to restrict"));
            }
            let post_decl = d
                .predicate("commandpost")
                .ok_or_else(|| fail("the domain declares no `commandpost` predicate"))?;
            if d.predicate("commander").is_none() {
                return Err(fail("the domain declares no `commander` predicate"));
            }
            let post_type = post_decl.params[0].ty.clone();
            let mut out = d.clone();
            for a in out.actions.iter_mut().filter(|a| is_comm_action(&a.name)) {
                *a = debrief(a, d, &post_type).map_err(fail)?;
            }
            Ok(out)
        }
        CommModel::NoComm => {
            if comm.is_empty() {
                return Err(fail("the domain has no communication action to remove"));
            }
            let mut out = d.clone();
            out.actions.retain(|a| !is_comm_action(&a.name));
            Ok(out)
        }
        CommModel::CommAll => {
            if comm.is_empty() {
                return Err(fail("the domain has no communication action to replace"));
            }
            let restricted = scenario == Scenario::CommanderNonBroadcast;
            if restricted && (d.predicate("liaison").is_none() || d.predicate("commander").is_none()) {
                return Err(fail(
                    "the non-broadcast scenario needs `liaison` and `commander` predicates",
                ));
            }
            let mut out = d.clone();
            out.actions.retain(|a| !is_comm_action(&a.name));
            let mut broadcasting = 0;
            for a in &mut out.actions {
                let Some(actor) = actor_var(a, d) else { continue };
                let receiver = fresh_var(a, "g");
                let own = |l: &LiteralTemplate| l.chain.first().is_some_and(|m| m.agent == Term::Var(actor.clone()));
                let mut extra = Vec::new();
                for item in &a.effects {
                    let literals: Vec<LiteralTemplate> = item
                        .literals
                        .iter()
                        .filter(|l| own(l))
                        .map(|l| {
                            let mut l = l.clone();
                            l.chain[0] = ModalityTemplate {
                                agent: Term::Var(receiver.clone()),
                                negated: l.chain[0].negated,
                            };
                            l
                        })
                        .collect();
                    if literals.is_empty() {
                        continue;
                    }
                    let mut quantifiers = item.quantifiers.clone();
                    quantifiers.push(TypedName::new(receiver.clone(), "agent"));
                    let mut guard = item.guard.clone();
                    if restricted {
                        guard.push(plain("liaison", &[&actor]));
                        guard.push(plain("commander", &[&receiver]));
                    }
                    extra.push(EffectItem {
                        quantifiers,
                        guard,
                        literals,
                    });
                }
                if !extra.is_empty() {
                    broadcasting += 1;
                    a.effects.extend(extra);
                }
            }
            if broadcasting == 0 {
                return Err(fail("no action acquires beliefs, so nothing could be broadcast"));
            }
            Ok(out)
        }
    }
}
