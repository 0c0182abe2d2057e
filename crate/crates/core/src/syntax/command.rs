use crate::kernel::Name;
use crate::tactic::{TacticDef, TacticExpr};

use super::surface::{Binder, Expr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductiveSrc {
    pub name: Name,
    /// Constructor names with their types as arrow chains of type names.
    pub ctors: Vec<(Name, Expr)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSrc {
    pub name: Name,
    pub binders: Vec<Binder>,
    pub statement: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateSrc {
    pub name: Name,
    /// `T₁ -> … -> Prop`
    pub sig: Expr,
    pub rules: Vec<RuleSrc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotationSrc {
    pub pattern: String,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixpointSrc {
    pub name: Name,
    pub params: Vec<Binder>,
    pub ret: Option<Name>,
    pub scrutinee: Name,
    pub branches: Vec<(Expr, Expr)>,
    pub notation: Option<NotationSrc>,
}

/// One vernacular command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Require(Name),
    Inductive(InductiveSrc),
    Predicate(PredicateSrc),
    Notation(NotationSrc),
    Fixpoint(FixpointSrc),
    Ltac(TacticDef),
    Lemma { name: Name, binders: Vec<Binder>, statement: Expr },
    Proof,
    Qed,
    Suggest,
    Search,
    SearchFailing(Vec<TacticExpr>),
    Tactic(TacticExpr),
}

impl Command {
    /// Commands that only make sense inside an open proof.
    pub fn in_proof(&self) -> bool {
        matches!(
            self,
            Command::Proof | Command::Qed | Command::Suggest | Command::Search | Command::SearchFailing(_) | Command::Tactic(_)
        )
    }
}
