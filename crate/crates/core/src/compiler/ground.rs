use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::{Fluent, Rml};
use crate::epddl::{DomainSpec, LiteralTemplate, ProblemSpec, TypedName};

use super::CompileError;

/// One conditional effect of a ground action. An empty guard always fires.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConditionalEffect {
    pub guard: Vec<Rml>,
    pub adds: Vec<Rml>,
    pub dels: Vec<Rml>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    /// Object bound to the first agent-typed parameter.
    pub actor: Option<String>,
    pub precondition: Vec<Rml>,
    pub effects: Vec<ConditionalEffect>,
}

impl GroundAction {
    /// `(name arg1 arg2 ...)`, the form plans are written in.
    pub fn label(&self) -> String {
        label(&self.name, &self.args)
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub(crate) fn label(name: &str, args: &[String]) -> String {
    let mut out = format!("({name}");
    for a in args {
        out.push(' ');
        out.push_str(a);
    }
    out.push(')');
    out
}

/// Cartesian product in odometer order (first position varies slowest).
pub(crate) fn product<T: Copy>(universes: &[Vec<T>]) -> Vec<Vec<T>> {
    if universes.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; universes.len()];
    loop {
        out.push(idx.iter().zip(universes).map(|(&i, u)| u[i]).collect());
        let mut k = universes.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < universes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// World predicates that no action changes, with their (closed-world) true atoms.
pub(crate) struct StaticFacts {
    predicates: HashSet<String>,
    true_atoms: HashSet<Fluent>,
}

impl StaticFacts {
    pub fn new(d: &DomainSpec, p: &ProblemSpec) -> Self {
        let changed: HashSet<&str> = d
            .actions
            .iter()
            .flat_map(|a| &a.effects)
            .flat_map(|e| &e.literals)
            .filter(|l| l.depth() == 0)
            .map(|l| l.atom.predicate.as_str())
            .collect();
        let predicates: HashSet<String> = d
            .predicates
            .iter()
            .map(|p| p.name.clone())
            .filter(|n| !changed.contains(n.as_str()))
            .collect();
        let true_atoms = p
            .init
            .iter()
            .filter(|l| l.depth() == 0 && !l.negated && predicates.contains(&l.fluent.predicate))
            .map(|l| l.fluent.clone())
            .collect();
        StaticFacts { predicates, true_atoms }
    }

    /// `Some(truth)` for a world literal over a static predicate.
    pub fn value(&self, l: &Rml) -> Option<bool> {
        (l.depth() == 0 && self.predicates.contains(&l.fluent.predicate))
            .then(|| self.true_atoms.contains(&l.fluent) != l.negated)
    }

    fn refutes(&self, lits: &[Rml]) -> bool {
        lits.iter().any(|l| self.value(l) == Some(false))
            || lits
                .iter()
                .any(|l| l.conflict_partners().iter().any(|p| lits.contains(p)))
    }
}

fn push_unique(out: &mut Vec<Rml>, l: Rml) {
    if !out.contains(&l) {
        out.push(l);
    }
}

fn ground_all(lits: &[LiteralTemplate], binding: &HashMap<String, String>) -> Vec<Rml> {
    let mut out = Vec::with_capacity(lits.len());
    for l in lits {
        // validated domains bind every variable
        push_unique(&mut out, l.ground(binding).expect("unbound variable after validation"));
    }
    out
}

fn universes<'a>(d: &'a DomainSpec, p: &'a ProblemSpec, params: &'a [TypedName]) -> Vec<Vec<&'a str>> {
    params.iter().map(|t| p.objects_of(d, &t.ty).collect()).collect()
}

/// Instantiates every schema over the typed object universe.
///
/// Instantiations whose precondition contradicts a static world fact or
/// itself are dropped, as are effect items whose guard does; nothing that
/// could ever fire is lost. A parameter type without objects yields no
/// instances.
pub fn ground(d: &DomainSpec, p: &ProblemSpec) -> Result<Vec<GroundAction>, CompileError> {
    if p.objects_of(d, "agent").next().is_none() {
        return Err(CompileError::EmptyUniverse("agent".into()));
    }
    let statics = StaticFacts::new(d, p);
    let mut out = Vec::new();
    for schema in &d.actions {
        let actor_pos = schema.parameters.iter().position(|t| d.is_subtype(&t.ty, "agent"));
        for args in product(&universes(d, p, &schema.parameters)) {
            let binding: HashMap<String, String> = schema
                .parameters
                .iter()
                .zip(&args)
                .map(|(t, a)| (t.name.clone(), a.to_string()))
                .collect();
            let precondition = ground_all(&schema.precondition, &binding);
            if statics.refutes(&precondition) {
                continue;
            }
            let mut effects = Vec::new();
            for item in &schema.effects {
                for extra in product(&universes(d, p, &item.quantifiers)) {
                    let mut inner = binding.clone();
                    for (q, o) in item.quantifiers.iter().zip(extra) {
                        inner.insert(q.name.clone(), o.to_string());
                    }
                    let guard = ground_all(&item.guard, &inner);
                    if statics.refutes(&guard) {
                        continue;
                    }
                    effects.push(ConditionalEffect {
                        guard,
                        adds: ground_all(&item.literals, &inner),
                        dels: Vec::new(),
                    });
                }
            }
            out.push(GroundAction {
                name: schema.name.clone(),
                args: args.iter().map(|a| a.to_string()).collect(),
                actor: actor_pos.map(|i| args[i].to_string()),
                precondition,
                effects,
            });
        }
    }
    Ok(out)
}

/// Every ground atom of every declared predicate, in declaration order.
pub fn ground_fluents(d: &DomainSpec, p: &ProblemSpec) -> Vec<Fluent> {
    let mut out = Vec::new();
    for pred in &d.predicates {
        for args in product(&universes(d, p, &pred.params)) {
            out.push(Fluent::new(pred.name.clone(), args));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_and_empty() {
        let u = vec![vec!["a", "b"], vec!["x", "y", "z"]];
        let p = product(&u);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec!["a", "x"]);
        assert_eq!(p[1], vec!["a", "y"]);
        assert_eq!(p[3], vec!["b", "x"]);
        assert_eq!(product::<&str>(&[]), vec![Vec::<&str>::new()]);
        assert!(product(&[vec!["a"], vec![]]).is_empty());
    }
}
