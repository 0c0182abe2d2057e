use std::fmt;

use serde::{Deserialize, Serialize};

use super::name::{fresh_name, Name};
use super::term::Formula;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HypKind {
    /// A local object variable of the given type.
    Var(Name),
    /// A named assumption.
    Prop(Formula),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hyp {
    pub name: Name,
    pub kind: HypKind,
}

impl Hyp {
    pub fn var(name: impl Into<Name>, ty: impl Into<Name>) -> Hyp {
        Hyp { name: name.into(), kind: HypKind::Var(ty.into()) }
    }

    pub fn prop(name: impl Into<Name>, statement: Formula) -> Hyp {
        Hyp { name: name.into(), kind: HypKind::Prop(statement) }
    }
}

/// Named hypotheses and a goal: the sequent `Γ ⊢ φ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProofState {
    pub hyps: Vec<Hyp>,
    pub goal: Formula,
}

impl ProofState {
    pub fn new(goal: Formula) -> ProofState {
        ProofState { hyps: Vec::new(), goal }
    }

    pub fn with_hyps(hyps: Vec<Hyp>, goal: Formula) -> ProofState {
        ProofState { hyps, goal }
    }

    pub fn hyp(&self, name: &Name) -> Option<&Hyp> {
        self.hyps.iter().rev().find(|h| &h.name == name)
    }

    pub fn has(&self, name: &str) -> bool {
        self.hyps.iter().any(|h| h.name.as_str() == name)
    }

    pub fn var_type(&self, name: &Name) -> Option<&Name> {
        match &self.hyp(name)?.kind {
            HypKind::Var(ty) => Some(ty),
            HypKind::Prop(_) => None,
        }
    }

    /// Variable declarations as a typing scope.
    pub fn scope(&self) -> Vec<(Name, Name)> {
        self.hyps
            .iter()
            .filter_map(|h| match &h.kind {
                HypKind::Var(ty) => Some((h.name.clone(), ty.clone())),
                HypKind::Prop(_) => None,
            })
            .collect()
    }

    pub fn fresh(&self, base: &str) -> Name {
        fresh_name(base, |c| self.has(c))
    }

    pub fn with_goal(&self, goal: Formula) -> ProofState {
        ProofState { hyps: self.hyps.clone(), goal }
    }

    pub fn push(&self, hyp: Hyp, goal: Formula) -> ProofState {
        let mut hyps = self.hyps.clone();
        hyps.push(hyp);
        ProofState { hyps, goal }
    }

    /// Hypothesis names are pairwise distinct.
    pub fn well_scoped(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.hyps.iter().all(|h| seen.insert(&h.name))
    }
}

impl fmt::Debug for ProofState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ProofState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.hyps {
            match &h.kind {
                HypKind::Var(ty) => writeln!(f, "{} : {}", h.name, ty)?,
                HypKind::Prop(p) => writeln!(f, "{} : {}", h.name, p)?,
            }
        }
        write!(f, "⊢ {}", self.goal)
    }
}
