use std::collections::HashMap;
use std::fmt;

use crate::belief::{Fluent, Modality, Rml};

/// Source position (1-based). Ignored by equality so that re-parsed specs
/// compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn parse(text: &str) -> Term {
        match text.strip_prefix('?') {
            Some(v) => Term::Var(v.to_string()),
            None => Term::Const(text.to_string()),
        }
    }

    pub fn resolve<'a>(&'a self, binding: &'a HashMap<String, String>) -> Option<&'a str> {
        match self {
            Term::Var(v) => binding.get(v).map(String::as_str),
            Term::Const(c) => Some(c),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    /// `None` means the implicit root type `object`.
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomTemplate {
    pub predicate: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalityTemplate {
    pub agent: Term,
    pub negated: bool,
}

/// An RML with variables allowed in chain agents and atom arguments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralTemplate {
    pub chain: Vec<ModalityTemplate>,
    pub atom: AtomTemplate,
    pub negated: bool,
    pub pos: Pos,
}

impl LiteralTemplate {
    pub fn depth(&self) -> usize {
        self.chain.len()
    }

    pub fn negate(&self) -> LiteralTemplate {
        let mut out = self.clone();
        match out.chain.first_mut() {
            Some(m) => m.negated = !m.negated,
            None => out.negated = !out.negated,
        }
        out
    }

    /// Every term mentioned, chain agents first.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.chain.iter().map(|m| &m.agent).chain(&self.atom.args)
    }

    /// Substitutes `binding`; `None` if some variable is unbound.
    pub fn ground(&self, binding: &HashMap<String, String>) -> Option<Rml> {
        let chain = self
            .chain
            .iter()
            .map(|m| {
                m.agent.resolve(binding).map(|a| Modality {
                    agent: a.to_string(),
                    negated: m.negated,
                })
            })
            .collect::<Option<Vec<_>>>()?;
        let args = self
            .atom
            .args
            .iter()
            .map(|t| t.resolve(binding).map(str::to_string))
            .collect::<Option<Vec<_>>>()?;
        Some(Rml {
            chain,
            fluent: Fluent {
                predicate: self.atom.predicate.clone(),
                args,
            },
            negated: self.negated,
        })
    }

    /// Template form of a ground literal.
    pub fn from_rml(rml: &Rml) -> LiteralTemplate {
        LiteralTemplate {
            chain: rml
                .chain
                .iter()
                .map(|m| ModalityTemplate {
                    agent: Term::Const(m.agent.clone()),
                    negated: m.negated,
                })
                .collect(),
            atom: AtomTemplate {
                predicate: rml.fluent.predicate.clone(),
                args: rml.fluent.args.iter().cloned().map(Term::Const).collect(),
            },
            negated: rml.negated,
            pos: Pos::default(),
        }
    }
}

/// One (possibly quantified, possibly conditional) effect.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EffectItem {
    /// Universal binders, outermost first.
    pub quantifiers: Vec<TypedName>,
    /// `when` guard; empty means unconditional.
    pub guard: Vec<LiteralTemplate>,
    /// Literals made true. A negative literal evicts its positive counterpart.
    pub literals: Vec<LiteralTemplate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeriveCondition {
    /// Carried as an annotation only.
    #[default]
    Always,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub derive_condition: DeriveCondition,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<LiteralTemplate>,
    pub effects: Vec<EffectItem>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSpec {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

impl DomainSpec {
    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == "object" || self.types.iter().any(|t| t.name == name)
    }

    /// True if `ty` is `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        let mut current = ty;
        // bounded walk guards against cyclic declarations
        for _ in 0..=self.types.len() + 1 {
            if current == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == current) {
                Some(TypeDecl {
                    parent: Some(parent), ..
                }) => current = parent,
                _ => return ancestor == "object",
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalFormula {
    pub conjuncts: Vec<Rml>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Rml>,
    pub goal: GoalFormula,
}

impl ProblemSpec {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }

    /// Objects whose type is `ty` or a subtype of it, in declaration order.
    pub fn objects_of<'a>(&'a self, domain: &'a DomainSpec, ty: &'a str) -> impl Iterator<Item = &'a str> {
        self.objects
            .iter()
            .filter(move |o| domain.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
    }

    /// Objects typed `agent` (or a subtype), in declaration order.
    pub fn agents<'a>(&'a self, domain: &'a DomainSpec) -> Vec<String> {
        self.objects_of(domain, "agent").map(str::to_string).collect()
    }
}
