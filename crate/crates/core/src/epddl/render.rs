use std::fmt::Write;

use super::ast::*;
use crate::belief::Rml;

fn literal(out: &mut String, lit: &LiteralTemplate) {
    let mut closes = 0;
    for m in &lit.chain {
        if m.negated {
            out.push_str("(not ");
            closes += 1;
        }
        let _ = write!(out, "[{}]", m.agent);
    }
    if lit.negated {
        out.push_str("(not ");
        closes += 1;
    }
    out.push('(');
    out.push_str(&lit.atom.predicate);
    for a in &lit.atom.args {
        let _ = write!(out, " {a}");
    }
    out.push(')');
    out.push_str(&")".repeat(closes));
}

fn rml(out: &mut String, r: &Rml) {
    literal(out, &LiteralTemplate::from_rml(r));
}

/// `(and l1 l2 ...)`, or the bare literal when there is exactly one.
fn conjunction(out: &mut String, lits: &[LiteralTemplate], force_and: bool) {
    if lits.len() == 1 && !force_and {
        literal(out, &lits[0]);
        return;
    }
    out.push_str("(and");
    for l in lits {
        out.push(' ');
        literal(out, l);
    }
    out.push(')');
}

/// Typed list with runs of equal types collapsed, e.g. `?a ?b - agent ?p - pos`.
/// Everything is typed explicitly so that no name inherits a later type.
fn typed_list(out: &mut String, names: &[TypedName], var: bool) {
    let mut i = 0;
    while i < names.len() {
        let ty = &names[i].ty;
        let mut j = i;
        while j < names.len() && &names[j].ty == ty {
            if j > 0 {
                out.push(' ');
            }
            if var {
                out.push('?');
            }
            out.push_str(&names[j].name);
            j += 1;
        }
        let _ = write!(out, " - {ty}");
        i = j;
    }
}

fn effect_item(out: &mut String, item: &EffectItem, bare_ok: bool) -> bool {
    let mut closes = 0;
    if !item.quantifiers.is_empty() {
        out.push_str("(forall (");
        typed_list(out, &item.quantifiers, true);
        out.push_str(") ");
        closes += 1;
    }
    let bare = item.quantifiers.is_empty() && item.guard.is_empty() && bare_ok;
    if !item.guard.is_empty() {
        out.push_str("(when ");
        conjunction(out, &item.guard, false);
        out.push(' ');
        conjunction(out, &item.literals, item.literals.is_empty());
        out.push(')');
    } else if bare {
        for (k, l) in item.literals.iter().enumerate() {
            if k > 0 {
                out.push_str("\n      ");
            }
            literal(out, l);
        }
    } else {
        // inside `forall`, or a plain item that must not merge with the previous one
        conjunction(out, &item.literals, item.quantifiers.is_empty());
    }
    out.push_str(&")".repeat(closes));
    bare && !item.literals.is_empty()
}

fn action(out: &mut String, a: &ActionSchema) {
    let _ = writeln!(out, "  (:action {}", a.name);
    out.push_str("    :derive-condition always\n");
    out.push_str("    :parameters (");
    typed_list(out, &a.parameters, true);
    out.push_str(")\n    :precondition ");
    conjunction(out, &a.precondition, true);
    out.push_str("\n    :effect (and");
    let mut previous_bare = false;
    for item in &a.effects {
        out.push_str("\n      ");
        previous_bare = effect_item(out, item, !previous_bare);
    }
    out.push_str("))\n");
}

/// Canonical `.epddl` text. Parsing the output yields a structurally equal domain.
pub fn render_domain(d: &DomainSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        out.push_str("  (:types");
        for t in &d.types {
            let _ = write!(out, " {} - {}", t.name, t.parent.as_deref().unwrap_or("object"));
        }
        out.push_str(")\n");
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates");
        for p in &d.predicates {
            let _ = write!(out, "\n    ({}", p.name);
            if !p.params.is_empty() {
                out.push(' ');
                typed_list(&mut out, &p.params, true);
            }
            out.push(')');
        }
        out.push_str(")\n");
    }
    for a in &d.actions {
        action(&mut out, a);
    }
    out.push_str(")\n");
    out
}

/// Canonical `.eprob` text.
pub fn render_problem(p: &ProblemSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain);
    out.push_str("  (:objects");
    for o in &p.objects {
        let _ = write!(out, "\n    {} - {}", o.name, o.ty);
    }
    out.push_str(")\n  (:init");
    for r in &p.init {
        out.push_str("\n    ");
        rml(&mut out, r);
    }
    out.push_str(")\n  (:goal (and");
    for r in &p.goal.conjuncts {
        out.push_str("\n    ");
        rml(&mut out, r);
    }
    out.push_str(")))\n");
    out
}
