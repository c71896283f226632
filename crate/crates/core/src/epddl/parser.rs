use std::collections::{BTreeSet, HashSet};

use super::ast::*;
use super::reader::{read, Sexp};
use super::EpddlError;
use crate::belief::Rml;

type Result<T> = std::result::Result<T, EpddlError>;

const RESERVED: &[&str] = &["and", "not", "forall", "when", "define", "either", "or"];

fn syntax(pos: Pos, message: impl Into<String>) -> EpddlError {
    EpddlError::Syntax {
        pos,
        message: message.into(),
    }
}

fn single_define(text: &str, kind: &str) -> Result<Vec<Sexp>> {
    let mut top = read(text)?;
    if top.len() != 1 {
        let pos = top.get(1).map(Sexp::pos).unwrap_or_default();
        return Err(syntax(pos, format!("expected exactly one ({kind}) definition")));
    }
    let root = top.pop().unwrap();
    let pos = root.pos();
    let items = match root {
        Sexp::List { items, .. } => items,
        other => return Err(syntax(other.pos(), "expected `(define ...)`")),
    };
    if !items.first().is_some_and(|s| s.is_keyword("define")) {
        return Err(syntax(pos, "expected `(define ...)`"));
    }
    Ok(items)
}

/// `(domain NAME)` / `(problem NAME)` header.
fn header(sexp: Option<&Sexp>, keyword: &str, at: Pos) -> Result<String> {
    let sexp = sexp.ok_or_else(|| syntax(at, format!("missing `({keyword} NAME)`")))?;
    match sexp.list() {
        Some([k, name]) if k.is_keyword(keyword) => name
            .symbol()
            .map(str::to_string)
            .ok_or_else(|| syntax(name.pos(), "expected a name")),
        _ => Err(syntax(sexp.pos(), format!("expected `({keyword} NAME)`"))),
    }
}

fn name_symbol(sexp: &Sexp, what: &str) -> Result<String> {
    match sexp.symbol() {
        Some(s) if !s.starts_with(':') && s != "-" => Ok(s.to_string()),
        _ => Err(syntax(sexp.pos(), format!("expected {what}"))),
    }
}

/// `a b - t c` → [(a,t),(b,t),(c,object)] with the position of each name.
fn typed_list(items: &[Sexp], vars: bool) -> Result<Vec<(TypedName, Pos)>> {
    let mut out = Vec::new();
    let mut group: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let text = item
            .symbol()
            .ok_or_else(|| syntax(item.pos(), "expected a name in a typed list"))?;
        if text == "-" {
            let ty = items
                .get(i + 1)
                .and_then(Sexp::symbol)
                .ok_or_else(|| syntax(item.pos(), "expected a type after `-`"))?;
            if group.is_empty() {
                return Err(syntax(item.pos(), "`-` without preceding names"));
            }
            for (name, pos) in group.drain(..) {
                out.push((TypedName::new(name, ty), pos));
            }
            i += 2;
            continue;
        }
        let name = if vars {
            text.strip_prefix('?')
                .filter(|v| !v.is_empty())
                .ok_or_else(|| syntax(item.pos(), format!("expected a variable, found `{text}`")))?
        } else {
            if text.starts_with('?') {
                return Err(syntax(item.pos(), format!("unexpected variable `{text}`")));
            }
            text
        };
        group.push((name.to_string(), item.pos()));
        i += 1;
    }
    for (name, pos) in group {
        out.push((TypedName::new(name, "object"), pos));
    }
    Ok(out)
}

fn atom(items: &[Sexp], pos: Pos) -> Result<AtomTemplate> {
    let predicate = items
        .first()
        .and_then(Sexp::symbol)
        .ok_or_else(|| syntax(pos, "expected `(predicate args...)`"))?;
    if RESERVED.iter().any(|r| predicate.eq_ignore_ascii_case(r)) || predicate.starts_with([':', '?']) {
        return Err(syntax(pos, format!("`{predicate}` cannot be used as a predicate")));
    }
    let args = items[1..]
        .iter()
        .map(|a| {
            a.symbol()
                .map(Term::parse)
                .ok_or_else(|| syntax(a.pos(), "atom arguments must be names or variables"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AtomTemplate {
        predicate: predicate.to_string(),
        args,
    })
}

/// A literal: `(p args)`, `(not L)`, or `[agent]L`.
pub(crate) fn literal(sexp: &Sexp) -> Result<LiteralTemplate> {
    match sexp {
        Sexp::Modal { agent, inner, pos } => {
            let mut lit = literal(inner)?;
            lit.chain.insert(
                0,
                ModalityTemplate {
                    agent: Term::parse(agent),
                    negated: false,
                },
            );
            lit.pos = *pos;
            Ok(lit)
        }
        Sexp::List { items, pos } => {
            if items.first().is_some_and(|h| h.is_keyword("not")) {
                match &items[1..] {
                    [inner] => {
                        let mut lit = literal(inner)?.negate();
                        lit.pos = *pos;
                        Ok(lit)
                    }
                    _ => Err(syntax(*pos, "`not` takes exactly one literal")),
                }
            } else if items
                .first()
                .is_some_and(|h| ["and", "forall", "when", "or"].iter().any(|k| h.is_keyword(k)))
            {
                Err(syntax(*pos, "expected a literal, found a compound formula"))
            } else {
                Ok(LiteralTemplate {
                    chain: Vec::new(),
                    atom: atom(items, *pos)?,
                    negated: false,
                    pos: *pos,
                })
            }
        }
        Sexp::Symbol { text, pos } => Err(syntax(*pos, format!("expected a literal, found `{text}`"))),
    }
}

/// `(and L*)` or a single literal.
fn conjunction(sexp: &Sexp) -> Result<Vec<LiteralTemplate>> {
    if sexp.head().as_deref() == Some("and") {
        sexp.list().unwrap()[1..].iter().map(literal).collect()
    } else {
        Ok(vec![literal(sexp)?])
    }
}

fn effect(sexp: &Sexp, quantifiers: &[TypedName], out: &mut Vec<EffectItem>) -> Result<()> {
    let flush = |group: &mut Vec<LiteralTemplate>, out: &mut Vec<EffectItem>| {
        if !group.is_empty() {
            out.push(EffectItem {
                quantifiers: quantifiers.to_vec(),
                guard: Vec::new(),
                literals: std::mem::take(group),
            });
        }
    };
    match sexp.head().as_deref() {
        Some("and") => {
            let mut group = Vec::new();
            for child in &sexp.list().unwrap()[1..] {
                match child.head().as_deref() {
                    Some("and" | "forall" | "when") => {
                        flush(&mut group, out);
                        effect(child, quantifiers, out)?;
                    }
                    _ => group.push(literal(child)?),
                }
            }
            flush(&mut group, out);
            Ok(())
        }
        Some("forall") => {
            let items = sexp.list().unwrap();
            let (vars, body): (Vec<TypedName>, &Sexp) = match &items[1..] {
                // (forall (?v - t ...) body)
                [Sexp::List { items: vs, .. }, body] => {
                    (typed_list(vs, true)?.into_iter().map(|(t, _)| t).collect(), body)
                }
                // (forall ?v - t body), as written in the commsurvivor listing
                [rest @ .., body] if !rest.is_empty() => {
                    (typed_list(rest, true)?.into_iter().map(|(t, _)| t).collect(), body)
                }
                _ => return Err(syntax(sexp.pos(), "malformed `forall`")),
            };
            if vars.is_empty() {
                return Err(syntax(sexp.pos(), "`forall` binds no variables"));
            }
            let mut inner = quantifiers.to_vec();
            inner.extend(vars);
            effect(body, &inner, out)
        }
        Some("when") => match &sexp.list().unwrap()[1..] {
            [cond, lits] => {
                let guard = conjunction(cond)?;
                if guard.is_empty() {
                    return Err(syntax(cond.pos(), "`when` needs a non-empty condition"));
                }
                out.push(EffectItem {
                    quantifiers: quantifiers.to_vec(),
                    guard,
                    literals: conjunction(lits)?,
                });
                Ok(())
            }
            _ => Err(syntax(sexp.pos(), "`when` takes a condition and an effect")),
        },
        _ => {
            out.push(EffectItem {
                quantifiers: quantifiers.to_vec(),
                guard: Vec::new(),
                literals: vec![literal(sexp)?],
            });
            Ok(())
        }
    }
}

fn action(items: &[Sexp], pos: Pos) -> Result<ActionSchema> {
    let name = name_symbol(
        items.get(1).ok_or_else(|| syntax(pos, "missing action name"))?,
        "an action name",
    )?;
    let mut derive = None;
    let mut parameters = Vec::new();
    let mut precondition = Vec::new();
    let mut effects = Vec::new();
    let mut seen = HashSet::new();
    let mut i = 2;
    while i < items.len() {
        let key = items[i]
            .symbol()
            .map(str::to_ascii_lowercase)
            .filter(|k| k.starts_with(':'))
            .ok_or_else(|| syntax(items[i].pos(), "expected an action keyword"))?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| syntax(items[i].pos(), format!("missing value for `{key}`")))?;
        if !seen.insert(key.clone()) {
            return Err(syntax(items[i].pos(), format!("duplicate `{key}`")));
        }
        match key.as_str() {
            ":derive-condition" => {
                let v = value.symbol().unwrap_or_default();
                if !v.eq_ignore_ascii_case("always") {
                    return Err(EpddlError::DeriveCondition {
                        pos: value.pos(),
                        value: v.to_string(),
                    });
                }
                derive = Some(DeriveCondition::Always);
            }
            ":parameters" => {
                let vs = value
                    .list()
                    .ok_or_else(|| syntax(value.pos(), "expected a parameter list"))?;
                parameters = typed_list(vs, true)?.into_iter().map(|(t, _)| t).collect();
            }
            ":precondition" => precondition = conjunction(value)?,
            ":effect" => effect(value, &[], &mut effects)?,
            other => return Err(syntax(items[i].pos(), format!("unknown action keyword `{other}`"))),
        }
        i += 2;
    }
    let derive_condition = derive.ok_or_else(|| syntax(pos, format!("action `{name}` lacks `:derive-condition`")))?;
    Ok(ActionSchema {
        name,
        derive_condition,
        parameters,
        precondition,
        effects,
        pos,
    })
}

/// Parses an `.epddl` domain.
pub fn parse_domain(text: &str) -> Result<DomainSpec> {
    let items = single_define(text, "domain")?;
    let name = header(items.get(1), "domain", items[0].pos())?;
    let mut domain = DomainSpec {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut type_positions = Vec::new();
    let mut pred_positions = Vec::new();
    for section in &items[2..] {
        let list = section
            .list()
            .ok_or_else(|| syntax(section.pos(), "expected a domain section"))?;
        match section.head().as_deref() {
            Some(":requirements") => {
                domain.requirements = list[1..]
                    .iter()
                    .map(|r| {
                        r.symbol()
                            .map(str::to_string)
                            .ok_or_else(|| syntax(r.pos(), "bad requirement"))
                    })
                    .collect::<Result<_>>()?;
            }
            Some(":types") => {
                for (t, pos) in typed_list(&list[1..], false)? {
                    let parent = (t.ty != "object").then_some(t.ty);
                    domain.types.push(TypeDecl { name: t.name, parent });
                    type_positions.push(pos);
                }
            }
            Some(":predicates") => {
                for p in &list[1..] {
                    let pl = p
                        .list()
                        .ok_or_else(|| syntax(p.pos(), "expected `(predicate ?x - t ...)`"))?;
                    let name = pl
                        .first()
                        .and_then(Sexp::symbol)
                        .ok_or_else(|| syntax(p.pos(), "expected a predicate name"))?;
                    let params = typed_list(&pl[1..], true)?;
                    pred_positions.push(params.iter().map(|(_, pos)| *pos).collect::<Vec<_>>());
                    domain.predicates.push(PredicateDecl {
                        name: name.to_string(),
                        params: params.into_iter().map(|(t, _)| t).collect(),
                    });
                }
            }
            Some(":action") => domain.actions.push(action(list, section.pos())?),
            _ => return Err(syntax(section.pos(), "unknown domain section")),
        }
    }

    // parents mentioned but never declared become children of `object`
    let declared: BTreeSet<String> = domain.types.iter().map(|t| t.name.clone()).collect();
    let mut implicit = Vec::new();
    for t in &domain.types {
        if let Some(p) = &t.parent {
            if !declared.contains(p) && !implicit.contains(p) && p != "object" {
                implicit.push(p.clone());
            }
        }
    }
    for p in implicit {
        domain.types.push(TypeDecl { name: p, parent: None });
    }
    check_domain(&domain, &pred_positions)?;
    Ok(domain)
}

fn check_domain(domain: &DomainSpec, pred_positions: &[Vec<Pos>]) -> Result<()> {
    if !domain.types.iter().any(|t| t.name == "agent") {
        return Err(EpddlError::UndeclaredType {
            pos: Pos::default(),
            name: "agent".into(),
        });
    }
    for (p, positions) in domain.predicates.iter().zip(pred_positions) {
        for (param, pos) in p.params.iter().zip(positions) {
            if !domain.has_type(&param.ty) {
                return Err(EpddlError::UndeclaredType {
                    pos: *pos,
                    name: param.ty.clone(),
                });
            }
        }
    }
    let mut names = HashSet::new();
    for a in &domain.actions {
        if !names.insert(a.name.as_str()) {
            return Err(EpddlError::DuplicateAction {
                pos: a.pos,
                name: a.name.clone(),
            });
        }
        let binders = a.parameters.iter().chain(a.effects.iter().flat_map(|e| &e.quantifiers));
        for b in binders {
            if !domain.has_type(&b.ty) {
                return Err(EpddlError::UndeclaredType {
                    pos: a.pos,
                    name: b.ty.clone(),
                });
            }
        }
        let literals = a
            .precondition
            .iter()
            .chain(a.effects.iter().flat_map(|e| e.guard.iter().chain(&e.literals)));
        for lit in literals {
            check_atom(domain, lit)?;
        }
    }
    Ok(())
}

fn check_atom(domain: &DomainSpec, lit: &LiteralTemplate) -> Result<()> {
    let decl = domain
        .predicate(&lit.atom.predicate)
        .ok_or_else(|| EpddlError::UndeclaredPredicate {
            pos: lit.pos,
            name: lit.atom.predicate.clone(),
        })?;
    if decl.params.len() != lit.atom.args.len() {
        return Err(EpddlError::Arity {
            pos: lit.pos,
            predicate: decl.name.clone(),
            expected: decl.params.len(),
            found: lit.atom.args.len(),
        });
    }
    Ok(())
}

fn ground_literal(sexp: &Sexp) -> Result<Rml> {
    let lit = literal(sexp)?;
    if let Some(Term::Var(v)) = lit.terms().find(|t| matches!(t, Term::Var(_))) {
        return Err(syntax(lit.pos, format!("variable `?{v}` in a problem file")));
    }
    Ok(lit.ground(&Default::default()).expect("constants only"))
}

/// Parses an `.eprob` problem. Init conflicts are rejected here; object
/// references are checked by `validate`.
pub fn parse_problem(text: &str) -> Result<ProblemSpec> {
    let items = single_define(text, "problem")?;
    let name = header(items.get(1), "problem", items[0].pos())?;
    let mut domain = None;
    let mut objects = Vec::new();
    let mut init: Vec<Rml> = Vec::new();
    let mut goal = None;
    for section in &items[2..] {
        let list = section
            .list()
            .ok_or_else(|| syntax(section.pos(), "expected a problem section"))?;
        match section.head().as_deref() {
            Some(":domain") => match &list[1..] {
                [d] => domain = Some(name_symbol(d, "a domain name")?),
                _ => return Err(syntax(section.pos(), "expected `(:domain NAME)`")),
            },
            Some(":objects") => {
                objects = typed_list(&list[1..], false)?.into_iter().map(|(t, _)| t).collect();
            }
            Some(":init") => {
                for item in &list[1..] {
                    let rml = ground_literal(item)?;
                    if let Some(other) = init.iter().find(|o| o.conflicts(&rml)) {
                        return Err(EpddlError::InitConflict {
                            pos: item.pos(),
                            first: other.clone(),
                            second: rml,
                        });
                    }
                    if !init.contains(&rml) {
                        init.push(rml);
                    }
                }
            }
            Some(":goal") => {
                let g = match &list[1..] {
                    [g] => g,
                    _ => return Err(syntax(section.pos(), "expected `(:goal FORMULA)`")),
                };
                let conj: Vec<&Sexp> = if g.head().as_deref() == Some("and") {
                    g.list().unwrap()[1..].iter().collect()
                } else {
                    vec![g]
                };
                let mut conjuncts: Vec<Rml> = Vec::new();
                for c in conj {
                    let rml = ground_literal(c)?;
                    if !conjuncts.contains(&rml) {
                        conjuncts.push(rml);
                    }
                }
                if conjuncts.is_empty() {
                    return Err(syntax(g.pos(), "the goal must have at least one conjunct"));
                }
                goal = Some(GoalFormula { conjuncts });
            }
            _ => return Err(syntax(section.pos(), "unknown problem section")),
        }
    }
    Ok(ProblemSpec {
        name,
        domain: domain.ok_or_else(|| syntax(items[0].pos(), "missing `(:domain NAME)`"))?,
        objects,
        init,
        goal: goal.ok_or_else(|| syntax(items[0].pos(), "missing `(:goal ...)`"))?,
    })
}
