//! Restricted modal literals (RMLs) and conflict-free belief states.
//!
//! An RML is a chain of at most three possibly-negated single-agent belief
//! operators applied to a possibly-negated ground fluent, e.g. `![a][b](p)`
//! reads "a does not believe that b believes p". Belief states are sets of
//! RMLs that never contain a conflicting pair. The logic is KD: beliefs are
//! consistent, and there are no introspection axioms.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Hard ceiling on nesting depth.
pub const MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BeliefError {
    #[error("depth bound {0} exceeds the maximum of {MAX_DEPTH}")]
    BoundTooLarge(usize),
    #[error("literal {literal} has depth {depth}, above the bound {bound}")]
    TooDeep { literal: Rml, depth: usize, bound: usize },
    #[error("conflicting literals {0} and {1}")]
    Conflict(Rml, Rml),
    #[error("cannot parse literal `{text}`: {reason}")]
    Syntax { text: String, reason: String },
}

/// Maximum nesting of belief operators admitted by a task (0..=3, default 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct DepthBound(usize);

impl DepthBound {
    pub fn new(depth: usize) -> Result<Self, BeliefError> {
        if depth > MAX_DEPTH {
            return Err(BeliefError::BoundTooLarge(depth));
        }
        Ok(DepthBound(depth))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn admits(self, literal: &Rml) -> bool {
        literal.depth() <= self.0
    }
}

impl Default for DepthBound {
    fn default() -> Self {
        DepthBound(1)
    }
}

impl TryFrom<usize> for DepthBound {
    type Error = BeliefError;
    fn try_from(value: usize) -> Result<Self, Self::Error> {
        DepthBound::new(value)
    }
}

impl From<DepthBound> for usize {
    fn from(value: DepthBound) -> Self {
        value.0
    }
}

/// A ground atom such as `(survivorat s1 p1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fluent {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Fluent {
    pub fn new<P, I, S>(predicate: P, args: I) -> Self
    where
        P: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Fluent {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for arg in &self.args {
            write!(f, " {arg}")?;
        }
        f.write_str(")")
    }
}

/// One belief operator `B_agent`, or `¬B_agent` when negated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Modality {
    pub agent: String,
    pub negated: bool,
}

impl Modality {
    pub fn believes(agent: impl Into<String>) -> Self {
        Modality {
            agent: agent.into(),
            negated: false,
        }
    }

    pub fn doubts(agent: impl Into<String>) -> Self {
        Modality {
            agent: agent.into(),
            negated: true,
        }
    }
}

/// Restricted modal literal. The chain is stored outermost-first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rml {
    pub chain: Vec<Modality>,
    pub fluent: Fluent,
    pub negated: bool,
}

impl Rml {
    /// Depth-0 literal over a world fluent.
    pub fn world(fluent: Fluent, negated: bool) -> Self {
        Rml {
            chain: Vec::new(),
            fluent,
            negated,
        }
    }

    pub fn pos(fluent: Fluent) -> Self {
        Rml::world(fluent, false)
    }

    pub fn neg(fluent: Fluent) -> Self {
        Rml::world(fluent, true)
    }

    /// Prefix this literal with one more operator: `B_agent self` (or `¬B_agent self`).
    pub fn under(mut self, modality: Modality) -> Self {
        self.chain.insert(0, modality);
        self
    }

    /// `B_agent self`.
    pub fn believed_by(self, agent: impl Into<String>) -> Self {
        self.under(Modality::believes(agent))
    }

    pub fn depth(&self) -> usize {
        self.chain.len()
    }

    /// Agent of the outermost operator, if any.
    pub fn outer_agent(&self) -> Option<&str> {
        self.chain.first().map(|m| m.agent.as_str())
    }

    /// Flip the outermost negation flag.
    pub fn negate(&self) -> Rml {
        let mut out = self.clone();
        match out.chain.first_mut() {
            Some(m) => m.negated = !m.negated,
            None => out.negated = !out.negated,
        }
        out
    }

    /// True iff the two literals cannot hold together: `(σ, ¬σ)` pairs, and
    /// `(σ·B_i x, σ·B_i ¬x)` pairs behind a shared all-positive prefix.
    pub fn conflicts(&self, other: &Rml) -> bool {
        if self.chain.len() != other.chain.len() || self.fluent != other.fluent {
            return false;
        }
        for (j, (a, b)) in self.chain.iter().zip(&other.chain).enumerate() {
            if a.agent != b.agent {
                return false;
            }
            if a.negated != b.negated {
                return self.chain[..j].iter().all(|m| !m.negated)
                    && self.chain[j + 1..] == other.chain[j + 1..]
                    && self.negated == other.negated;
            }
        }
        self.negated != other.negated && self.chain.iter().all(|m| !m.negated)
    }

    /// Every literal that conflicts with `self`. At most `depth + 1` of them.
    pub fn conflict_partners(&self) -> Vec<Rml> {
        let mut out = Vec::with_capacity(self.chain.len() + 1);
        for j in 0..self.chain.len() {
            let mut partner = self.clone();
            partner.chain[j].negated = !partner.chain[j].negated;
            out.push(partner);
            if self.chain[j].negated {
                return out;
            }
        }
        let mut partner = self.clone();
        partner.negated = !partner.negated;
        out.push(partner);
        out
    }

    /// The literal the KD closure rule derives this one from, if any:
    /// `σ·¬B_i ¬x` is licensed by `σ·B_i x` when σ is all-positive.
    pub fn closure_source(&self) -> Option<Rml> {
        let j = self.chain.iter().position(|m| m.negated)?;
        let mut rest = Rml {
            chain: self.chain[j + 1..].to_vec(),
            fluent: self.fluent.clone(),
            negated: self.negated,
        };
        let rest_negated = rest.chain.first().map_or(rest.negated, |m| m.negated);
        if !rest_negated {
            return None;
        }
        rest = rest.negate();
        let mut chain = self.chain[..=j].to_vec();
        chain[j].negated = false;
        chain.extend(rest.chain);
        Some(Rml {
            chain,
            fluent: rest.fluent,
            negated: rest.negated,
        })
    }
}

impl fmt::Display for Rml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.chain {
            if m.negated {
                f.write_str("!")?;
            }
            write!(f, "[{}]", m.agent)?;
        }
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}", self.fluent)
    }
}

impl FromStr for Rml {
    type Err = BeliefError;

    /// Parses the canonical rendering, e.g. `![a](survivorat s1 p1)`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let fail = |reason: &str| BeliefError::Syntax {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let mut rest = text.trim();
        let mut chain = Vec::new();
        loop {
            let (negated, after) = match rest.strip_prefix('!') {
                Some(r) => (true, r.trim_start()),
                None => (false, rest),
            };
            if let Some(r) = after.strip_prefix('[') {
                let close = r.find(']').ok_or_else(|| fail("unterminated `[`"))?;
                let agent = r[..close].trim();
                if agent.is_empty() || agent.contains(char::is_whitespace) {
                    return Err(fail("bad agent name"));
                }
                chain.push(Modality {
                    agent: agent.to_string(),
                    negated,
                });
                rest = r[close + 1..].trim_start();
                continue;
            }
            let body = after
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| fail("expected `(predicate args...)`"))?;
            let mut words = body.split_whitespace();
            let predicate = words.next().ok_or_else(|| fail("empty atom"))?;
            if predicate.contains(['(', ')', '[', ']']) {
                return Err(fail("malformed atom"));
            }
            let args: Vec<&str> = words.collect();
            if args.iter().any(|a| a.contains(['(', ')', '[', ']'])) {
                return Err(fail("malformed atom"));
            }
            return Ok(Rml {
                chain,
                fluent: Fluent::new(predicate, args),
                negated,
            });
        }
    }
}

impl Serialize for Rml {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rml {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Fluent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fluent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let rml: Rml = text.parse().map_err(serde::de::Error::custom)?;
        if rml.depth() > 0 || rml.negated {
            return Err(serde::de::Error::custom(format!("`{text}` is not a plain fluent")));
        }
        Ok(rml.fluent)
    }
}

/// A conflict-free set of RMLs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rml>", into = "Vec<Rml>")]
pub struct BeliefState {
    literals: BTreeSet<Rml>,
}

impl BeliefState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a state, rejecting conflicting pairs and literals deeper than [`MAX_DEPTH`].
    pub fn from_literals<I: IntoIterator<Item = Rml>>(literals: I) -> Result<Self, BeliefError> {
        let literals: BTreeSet<Rml> = literals.into_iter().collect();
        for l in &literals {
            if l.depth() > MAX_DEPTH {
                return Err(BeliefError::TooDeep {
                    literal: l.clone(),
                    depth: l.depth(),
                    bound: MAX_DEPTH,
                });
            }
            if let Some(p) = l.conflict_partners().into_iter().find(|p| literals.contains(p)) {
                let (a, b) = if *l < p { (l.clone(), p) } else { (p, l.clone()) };
                return Err(BeliefError::Conflict(a, b));
            }
        }
        Ok(BeliefState { literals })
    }

    pub fn contains(&self, literal: &Rml) -> bool {
        self.literals.contains(literal)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rml> {
        self.literals.iter()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn literals(&self) -> &BTreeSet<Rml> {
        &self.literals
    }

    /// Membership, or the single KD closure step `σ·B_i x ⊢ σ·¬B_i ¬x`.
    /// Absent literals are not entailed (closed world at query level).
    pub fn entails(&self, literal: &Rml) -> bool {
        self.literals.contains(literal) || literal.closure_source().is_some_and(|src| self.literals.contains(&src))
    }

    /// `(self \ dels \ conflicts-with-adds) ∪ adds`.
    pub fn apply_effects<'a, A, D>(&self, adds: A, dels: D) -> Result<BeliefState, BeliefError>
    where
        A: IntoIterator<Item = &'a Rml>,
        D: IntoIterator<Item = &'a Rml>,
    {
        let adds: BTreeSet<&Rml> = adds.into_iter().collect();
        for l in &adds {
            if let Some(p) = l.conflict_partners().iter().find(|p| adds.contains(p)) {
                return Err(BeliefError::Conflict((*l).clone(), p.clone()));
            }
        }
        let mut literals = self.literals.clone();
        for d in dels {
            literals.remove(d);
        }
        for l in &adds {
            for p in l.conflict_partners() {
                literals.remove(&p);
            }
        }
        literals.extend(adds.into_iter().cloned());
        Ok(BeliefState { literals })
    }

    /// Restriction to literals whose outermost operator is a positive or
    /// negative belief of `agent`.
    pub fn of_agent(&self, agent: &str) -> BeliefState {
        BeliefState {
            literals: self
                .literals
                .iter()
                .filter(|l| l.outer_agent() == Some(agent))
                .cloned()
                .collect(),
        }
    }

    /// Depth-0 part.
    pub fn world(&self) -> BeliefState {
        BeliefState {
            literals: self.literals.iter().filter(|l| l.depth() == 0).cloned().collect(),
        }
    }
}

impl TryFrom<Vec<Rml>> for BeliefState {
    type Error = BeliefError;
    fn try_from(value: Vec<Rml>) -> Result<Self, Self::Error> {
        BeliefState::from_literals(value)
    }
}

impl From<BeliefState> for Vec<Rml> {
    fn from(value: BeliefState) -> Self {
        value.literals.into_iter().collect()
    }
}

impl FromIterator<Rml> for BeliefState {
    /// Unchecked collection; callers guarantee conflict-freedom.
    fn from_iter<T: IntoIterator<Item = Rml>>(iter: T) -> Self {
        BeliefState {
            literals: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> Rml {
        Rml::pos(Fluent::new("p", Vec::<String>::new()))
    }

    fn lit(s: &str) -> Rml {
        s.parse().unwrap()
    }

    #[test]
    fn negate_flips_outermost() {
        assert_eq!(p().negate(), lit("!(p)"));
        assert_eq!(lit("[a](p)").negate(), lit("![a](p)"));
        let l = lit("[a]!(p)");
        assert_eq!(l.negate().negate(), l);
    }

    #[test]
    fn depth_counts_operators() {
        assert_eq!(p().depth(), 0);
        assert_eq!(lit("[a](survivorat s1 p1)").depth(), 1);
        assert_eq!(lit("![a][b]!(p)").depth(), 2);
    }

    #[test]
    fn conflict_examples() {
        assert!(lit("(p)").conflicts(&lit("!(p)")));
        assert!(lit("[a](p)").conflicts(&lit("[a]!(p)")));
        assert!(!lit("[a](p)").conflicts(&lit("[b]!(p)")));
        // a may be undecided about p
        assert!(!lit("![a](p)").conflicts(&lit("![a]!(p)")));
        assert!(lit("[a][b](p)").conflicts(&lit("[a]![b](p)")));
        assert!(lit("[a][b](p)").conflicts(&lit("[a][b]!(p)")));
        assert!(!lit("![a][b](p)").conflicts(&lit("![a][b]!(p)")));
    }

    #[test]
    fn partners_match_conflicts() {
        let l = lit("[a][b]!(p)");
        let partners = l.conflict_partners();
        assert_eq!(partners, vec![lit("![a][b]!(p)"), lit("[a]![b]!(p)"), lit("[a][b](p)")]);
        assert_eq!(lit("![a][b](p)").conflict_partners(), vec![lit("[a][b](p)")]);
    }

    #[test]
    fn entailment_rules() {
        let s = BeliefState::from_literals([lit("[a](p)")]).unwrap();
        assert!(s.entails(&lit("![a]!(p)")));
        assert!(s.entails(&lit("[a](p)")));
        assert!(!s.entails(&lit("![a](p)")));
        assert!(!BeliefState::new().entails(&p()));
        let nested = BeliefState::from_literals([lit("[a][b](p)")]).unwrap();
        assert!(nested.entails(&lit("[a]![b]!(p)")));
        assert!(!nested.entails(&lit("![a]!(p)")));
    }

    #[test]
    fn apply_effects_examples() {
        let s = BeliefState::from_literals([lit("[a]!(p)")]).unwrap();
        let r = s.apply_effects(&[lit("[a](p)")], &[]).unwrap();
        assert_eq!(r, BeliefState::from_literals([lit("[a](p)")]).unwrap());

        let s = BeliefState::from_literals([lit("(q)")]).unwrap();
        let r = s.apply_effects(&[], &[lit("(q)")]).unwrap();
        assert!(r.is_empty());

        let s = BeliefState::from_literals([lit("[a](p)"), lit("[b](p)")]).unwrap();
        let r = s.apply_effects(&[lit("[c](p)")], &[]).unwrap();
        assert_eq!(r.len(), 3);
        let all: Vec<&Rml> = r.iter().collect();
        for x in &all {
            for y in &all {
                assert!(!x.conflicts(y));
            }
        }
    }

    #[test]
    fn apply_effects_rejects_conflicting_adds() {
        let err = BeliefState::new()
            .apply_effects(&[lit("[a](p)"), lit("[a]!(p)")], &[])
            .unwrap_err();
        assert!(matches!(err, BeliefError::Conflict(..)));
    }

    #[test]
    fn from_literals_rejects_conflicts() {
        assert!(BeliefState::from_literals([lit("(p)"), lit("!(p)")]).is_err());
    }

    #[test]
    fn canonical_text() {
        let l = lit("![a](survivorat s1 p1)");
        assert_eq!(l.to_string(), "![a](survivorat s1 p1)");
        assert_eq!(lit("[a]!(p)").to_string(), "[a]!(p)");
        assert!("[a(p)".parse::<Rml>().is_err());
        assert!("p".parse::<Rml>().is_err());
    }

    #[test]
    fn depth_bound_limits() {
        assert!(DepthBound::new(3).is_ok());
        assert!(DepthBound::new(4).is_err());
        assert_eq!(DepthBound::default().get(), 1);
    }

    fn arb_rml() -> impl Strategy<Value = Rml> {
        let modality = (0..3usize, any::<bool>()).prop_map(|(a, negated)| Modality {
            agent: ["a", "b", "c"][a].to_string(),
            negated,
        });
        (prop::collection::vec(modality, 0..=2), 0..3usize, any::<bool>()).prop_map(|(chain, f, negated)| Rml {
            chain,
            fluent: Fluent::new(["p", "q", "r"][f], Vec::<String>::new()),
            negated,
        })
    }

    fn arb_state() -> impl Strategy<Value = BeliefState> {
        prop::collection::vec(arb_rml(), 0..12).prop_map(|ls| {
            let mut kept: Vec<Rml> = Vec::new();
            for l in ls {
                if !kept.iter().any(|k| k.conflicts(&l)) {
                    kept.push(l);
                }
            }
            BeliefState::from_literals(kept).unwrap()
        })
    }

    proptest! {
        #[test]
        fn negate_involution(l in arb_rml()) {
            prop_assert_eq!(l.negate().negate(), l);
        }

        #[test]
        fn negation_always_conflicts(l in arb_rml()) {
            prop_assert!(l.conflicts(&l.negate()));
        }

        #[test]
        fn conflicts_symmetric(a in arb_rml(), b in arb_rml()) {
            prop_assert_eq!(a.conflicts(&b), b.conflicts(&a));
        }

        #[test]
        fn partners_are_exactly_the_conflicts(a in arb_rml(), b in arb_rml()) {
            prop_assert_eq!(a.conflict_partners().contains(&b), a.conflicts(&b));
        }

        #[test]
        fn apply_preserves_conflict_freedom(s in arb_state(), adds in arb_state(), dels in prop::collection::vec(arb_rml(), 0..4)) {
            let adds: Vec<Rml> = adds.iter().cloned().collect();
            let r = s.apply_effects(&adds, &dels).unwrap();
            prop_assert!(BeliefState::from_literals(r.iter().cloned()).is_ok());
        }

        #[test]
        fn frame_property(s in arb_state(), adds in arb_state(), dels in prop::collection::vec(arb_rml(), 0..4), l in arb_rml()) {
            let adds: Vec<Rml> = adds.iter().cloned().collect();
            if s.entails(&l) && !dels.contains(&l) && !adds.iter().any(|a| a.conflicts(&l)) {
                // the closure source must survive too when l is derived
                let r = s.apply_effects(&adds, &dels).unwrap();
                if !s.contains(&l) {
                    let src = l.closure_source().unwrap();
                    if dels.contains(&src) || adds.iter().any(|a| a.conflicts(&src)) {
                        return Ok(());
                    }
                }
                prop_assert!(r.entails(&l));
            }
        }

        #[test]
        fn canonical_round_trip(l in arb_rml()) {
            prop_assert_eq!(l.to_string().parse::<Rml>().unwrap(), l);
        }
    }
}
