use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::ast::*;
use crate::belief::{DepthBound, Rml};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCategory {
    DomainMismatch,
    UnknownType,
    DuplicateObject,
    UnresolvedObject,
    UndeclaredPredicate,
    Arity,
    ArgumentType,
    ChainType,
    UnboundVariable,
    DepthBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub category: DiagnosticCategory,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.location, self.category, self.message)
    }
}

struct Checker<'a> {
    d: &'a DomainSpec,
    objects: HashMap<&'a str, &'a str>,
    bound: DepthBound,
    out: Vec<Diagnostic>,
}

impl<'a> Checker<'a> {
    fn report(&mut self, category: DiagnosticCategory, location: &str, message: String) {
        self.out.push(Diagnostic {
            category,
            location: location.to_string(),
            message,
        });
    }

    fn check_type(&mut self, ty: &str, location: &str) {
        if !self.d.has_type(ty) {
            self.report(
                DiagnosticCategory::UnknownType,
                location,
                format!("type `{ty}` is not declared"),
            );
        }
    }

    /// Type of a term under `scope`, reporting unbound variables and unknown constants.
    fn term_type(&mut self, term: &Term, scope: &HashMap<String, String>, location: &str) -> Option<String> {
        match term {
            Term::Var(v) => match scope.get(v) {
                Some(t) => Some(t.clone()),
                None => {
                    self.report(
                        DiagnosticCategory::UnboundVariable,
                        location,
                        format!("variable `?{v}` is not bound"),
                    );
                    None
                }
            },
            Term::Const(c) => match self.objects.get(c.as_str()) {
                Some(t) => Some(t.to_string()),
                None => {
                    self.report(
                        DiagnosticCategory::UnresolvedObject,
                        location,
                        format!("object `{c}` is not declared"),
                    );
                    None
                }
            },
        }
    }

    fn literal(&mut self, lit: &LiteralTemplate, scope: &HashMap<String, String>, location: &str) {
        if lit.depth() > self.bound.get() {
            self.report(
                DiagnosticCategory::DepthBound,
                location,
                format!("nesting depth {} exceeds the bound {}", lit.depth(), self.bound.get()),
            );
        }
        for m in &lit.chain {
            if let Some(ty) = self.term_type(&m.agent, scope, location) {
                if !self.d.is_subtype(&ty, "agent") {
                    self.report(
                        DiagnosticCategory::ChainType,
                        location,
                        format!("belief operator over `{}` of type `{ty}`, expected an agent", m.agent),
                    );
                }
            }
        }
        let Some(decl) = self.d.predicate(&lit.atom.predicate) else {
            self.report(
                DiagnosticCategory::UndeclaredPredicate,
                location,
                format!("predicate `{}` is not declared", lit.atom.predicate),
            );
            return;
        };
        if decl.params.len() != lit.atom.args.len() {
            self.report(
                DiagnosticCategory::Arity,
                location,
                format!(
                    "`{}` takes {} arguments, found {}",
                    decl.name,
                    decl.params.len(),
                    lit.atom.args.len()
                ),
            );
            return;
        }
        for (arg, param) in lit.atom.args.iter().zip(&decl.params) {
            if let Some(ty) = self.term_type(arg, scope, location) {
                if !self.d.is_subtype(&ty, &param.ty) {
                    self.report(
                        DiagnosticCategory::ArgumentType,
                        location,
                        format!("`{arg}` has type `{ty}`, `{}` expects `{}`", decl.name, param.ty),
                    );
                }
            }
        }
    }

    fn rml(&mut self, r: &Rml, location: &str) {
        self.literal(&LiteralTemplate::from_rml(r), &HashMap::new(), location);
    }
}

/// Cross-reference check of a domain/problem pair under a nesting bound.
/// An empty result means grounding cannot hit a dangling reference.
pub fn validate(d: &DomainSpec, p: &ProblemSpec, bound: DepthBound) -> Vec<Diagnostic> {
    let mut c = Checker {
        d,
        objects: p.objects.iter().map(|o| (o.name.as_str(), o.ty.as_str())).collect(),
        bound,
        out: Vec::new(),
    };

    if p.domain != d.name {
        c.report(
            DiagnosticCategory::DomainMismatch,
            "problem",
            format!("problem refers to domain `{}`, got `{}`", p.domain, d.name),
        );
    }
    for t in &d.types {
        if let Some(parent) = &t.parent {
            c.check_type(parent, &format!("type {}", t.name));
        }
    }
    for pred in &d.predicates {
        for param in &pred.params {
            c.check_type(&param.ty, &format!("predicate {}", pred.name));
        }
    }
    for a in &d.actions {
        let mut scope = HashMap::new();
        for param in &a.parameters {
            c.check_type(&param.ty, &format!("action {} parameters", a.name));
            scope.insert(param.name.clone(), param.ty.clone());
        }
        for (i, lit) in a.precondition.iter().enumerate() {
            c.literal(
                lit,
                &scope,
                &format!("action {} precondition {} ({})", a.name, i + 1, lit.pos),
            );
        }
        for (i, item) in a.effects.iter().enumerate() {
            let mut inner = scope.clone();
            for q in &item.quantifiers {
                c.check_type(&q.ty, &format!("action {} effect {}", a.name, i + 1));
                inner.insert(q.name.clone(), q.ty.clone());
            }
            for lit in item.guard.iter().chain(&item.literals) {
                c.literal(
                    lit,
                    &inner,
                    &format!("action {} effect {} ({})", a.name, i + 1, lit.pos),
                );
            }
        }
    }

    let mut seen = HashSet::new();
    for o in &p.objects {
        if !seen.insert(o.name.as_str()) {
            c.report(
                DiagnosticCategory::DuplicateObject,
                &format!("object {}", o.name),
                format!("object `{}` is declared more than once", o.name),
            );
        }
        c.check_type(&o.ty, &format!("object {}", o.name));
    }
    for (i, r) in p.init.iter().enumerate() {
        c.rml(r, &format!("init {}", i + 1));
    }
    for (i, r) in p.goal.conjuncts.iter().enumerate() {
        c.rml(r, &format!("goal conjunct {}", i + 1));
    }
    c.out
}
