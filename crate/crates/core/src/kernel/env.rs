//! Declarations and the persistent environment that holds them.

use std::fmt;
use std::sync::Arc;

use im::{OrdMap, Vector};
use serde::{Deserialize, Serialize};

use super::name::Name;
use super::term::{Formula, Term};
use crate::tactic::TacticDef;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Namespace {
    Type,
    Constructor,
    Function,
    Lemma,
    Tactic,
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Namespace::Type => "type",
            Namespace::Constructor => "constructor",
            Namespace::Function => "function",
            Namespace::Lemma => "lemma",
            Namespace::Tactic => "tactic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("duplicate {namespace} name `{name}`")]
    DuplicateName { namespace: Namespace, name: Name },
    #[error("unknown reference `{0}`")]
    UnknownReference(Name),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch { name: Name, expected: usize, found: usize },
    #[error("termination check failed for `{name}`: {reason}")]
    TerminationCheck { name: Name, reason: String },
    #[error("ill-typed: {0}")]
    IllTyped(String),
    #[error("malformed declaration: {0}")]
    Malformed(String),
}

pub type KernelResult<T> = Result<T, KernelError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constructor {
    pub name: Name,
    pub args: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductiveType {
    pub name: Name,
    pub ctors: Vec<Constructor>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateRule {
    pub name: Name,
    /// Universally closed: `∀ x̄, P₁ -> … -> Pₙ -> pred t̄`.
    pub statement: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductivePredicate {
    pub name: Name,
    pub arg_types: Vec<Name>,
    pub rules: Vec<PredicateRule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: Name,
    pub ty: Name,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Branch {
    pub ctor: Name,
    pub binders: Vec<Name>,
    pub body: Term,
}

/// A structurally recursive function whose body is one match on the
/// decreasing parameter, with one branch per constructor in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixpointFn {
    pub name: Name,
    pub params: Vec<Param>,
    pub ret: Name,
    pub decreasing: usize,
    pub branches: Vec<Branch>,
}

impl FixpointFn {
    pub fn branch(&self, ctor: &Name) -> Option<&Branch> {
        self.branches.iter().find(|b| &b.ctor == ctor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NotationKind {
    /// `[]`
    Nil,
    /// `x :: xs`
    Cons,
    /// `xs ++ ys`
    Append,
}

impl NotationKind {
    pub fn arity(self) -> usize {
        match self {
            NotationKind::Nil => 0,
            NotationKind::Cons | NotationKind::Append => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notation {
    pub kind: NotationKind,
    pub target: Name,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma {
    pub name: Name,
    pub statement: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Declaration {
    Inductive(InductiveType),
    Predicate(InductivePredicate),
    Fixpoint(FixpointFn),
    Notation(Notation),
    Lemma(Lemma),
    Tactic(TacticDef),
}

impl Declaration {
    pub fn name(&self) -> Name {
        match self {
            Declaration::Inductive(d) => d.name.clone(),
            Declaration::Predicate(d) => d.name.clone(),
            Declaration::Fixpoint(d) => d.name.clone(),
            Declaration::Notation(d) => d.target.clone(),
            Declaration::Lemma(d) => d.name.clone(),
            Declaration::Tactic(d) => d.name.clone(),
        }
    }
}

/// What a head symbol in a term refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Head<'a> {
    Ctor { ty: &'a InductiveType, index: usize },
    Fix(&'a FixpointFn),
}

/// Persistent environment. Cloning is O(1); `declare` returns a new value
/// and leaves the receiver untouched.
#[derive(Clone, Default)]
pub struct Environment {
    types: OrdMap<Name, Arc<InductiveType>>,
    ctors: OrdMap<Name, (Name, usize)>,
    preds: OrdMap<Name, Arc<InductivePredicate>>,
    rules: OrdMap<Name, (Name, usize)>,
    fixpoints: OrdMap<Name, Arc<FixpointFn>>,
    lemmas: OrdMap<Name, Formula>,
    tactics: OrdMap<Name, Arc<TacticDef>>,
    notations: OrdMap<NotationKindKey, Name>,
    log: Vector<Declaration>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct NotationKindKey(u8);

impl From<NotationKind> for NotationKindKey {
    fn from(k: NotationKind) -> Self {
        NotationKindKey(k as u8)
    }
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Environment").field("declarations", &self.log.len()).finish()
    }
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declarations in insertion order.
    pub fn declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.log.iter()
    }

    pub fn inductive(&self, name: &Name) -> Option<&InductiveType> {
        self.types.get(name).map(|t| &**t)
    }

    pub fn predicate(&self, name: &Name) -> Option<&InductivePredicate> {
        self.preds.get(name).map(|p| &**p)
    }

    pub fn fixpoint(&self, name: &Name) -> Option<&FixpointFn> {
        self.fixpoints.get(name).map(|f| &**f)
    }

    pub fn lemma(&self, name: &Name) -> Option<&Formula> {
        self.lemmas.get(name)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = (&Name, &Formula)> {
        self.lemmas.iter()
    }

    pub fn tactic(&self, name: &Name) -> Option<&TacticDef> {
        self.tactics.get(name).map(|t| &**t)
    }

    pub fn constructor(&self, name: &Name) -> Option<(&InductiveType, usize)> {
        let (ty, index) = self.ctors.get(name)?;
        Some((self.types.get(ty)?, *index))
    }

    /// A predicate rule's closed statement.
    pub fn rule(&self, name: &Name) -> Option<(&InductivePredicate, &PredicateRule)> {
        let (pred, index) = self.rules.get(name)?;
        let p = self.preds.get(pred)?;
        Some((p, &p.rules[*index]))
    }

    pub fn head(&self, name: &Name) -> Option<Head<'_>> {
        if let Some((ty, index)) = self.constructor(name) {
            return Some(Head::Ctor { ty, index });
        }
        self.fixpoint(name).map(Head::Fix)
    }

    pub fn notation(&self, kind: NotationKind) -> Option<&Name> {
        self.notations.get(&kind.into())
    }

    /// Argument types and result type of a constructor or function.
    pub fn signature(&self, name: &Name) -> Option<(Vec<Name>, Name)> {
        match self.head(name)? {
            Head::Ctor { ty, index } => Some((ty.ctors[index].args.clone(), ty.name.clone())),
            Head::Fix(f) => Some((f.params.iter().map(|p| p.ty.clone()).collect(), f.ret.clone())),
        }
    }

    pub fn is_type(&self, name: &Name) -> bool {
        self.types.contains_key(name)
    }

    fn fresh_in(&self, ns: Namespace, name: &Name) -> KernelResult<()> {
        let taken = match ns {
            Namespace::Type => self.types.contains_key(name) || self.preds.contains_key(name),
            Namespace::Constructor => self.ctors.contains_key(name) || self.rules.contains_key(name),
            Namespace::Function => self.fixpoints.contains_key(name),
            Namespace::Lemma => self.lemmas.contains_key(name),
            Namespace::Tactic => self.tactics.contains_key(name),
        };
        if name.as_str().is_empty() {
            return Err(KernelError::Malformed("empty name".into()));
        }
        if taken {
            return Err(KernelError::DuplicateName { namespace: ns, name: name.clone() });
        }
        Ok(())
    }

    /// Checks `decl` against this environment and returns the extended
    /// environment.
    pub fn declare(&self, decl: Declaration) -> KernelResult<Environment> {
        let mut env = self.clone();
        match &decl {
            Declaration::Inductive(ty) => env.add_inductive(ty)?,
            Declaration::Predicate(p) => env.add_predicate(p)?,
            Declaration::Fixpoint(f) => env.add_fixpoint(f)?,
            Declaration::Notation(n) => env.add_notation(n)?,
            Declaration::Lemma(l) => env.add_lemma(l)?,
            Declaration::Tactic(t) => env.add_tactic(t)?,
        }
        env.log.push_back(decl);
        Ok(env)
    }

    fn add_inductive(&mut self, ty: &InductiveType) -> KernelResult<()> {
        self.fresh_in(Namespace::Type, &ty.name)?;
        if ty.ctors.is_empty() {
            return Err(KernelError::Malformed(format!("`{}` has no constructors", ty.name)));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &ty.ctors {
            self.fresh_in(Namespace::Constructor, &c.name)?;
            if !seen.insert(&c.name) {
                return Err(KernelError::DuplicateName { namespace: Namespace::Constructor, name: c.name.clone() });
            }
            for a in &c.args {
                if a != &ty.name && !self.is_type(a) {
                    return Err(KernelError::UnknownReference(a.clone()));
                }
            }
        }
        if ty.ctors.iter().all(|c| c.args.contains(&ty.name)) {
            return Err(KernelError::Malformed(format!("`{}` has no non-recursive constructor", ty.name)));
        }
        for (i, c) in ty.ctors.iter().enumerate() {
            self.ctors.insert(c.name.clone(), (ty.name.clone(), i));
        }
        self.types.insert(ty.name.clone(), Arc::new(ty.clone()));
        Ok(())
    }

    fn add_predicate(&mut self, p: &InductivePredicate) -> KernelResult<()> {
        self.fresh_in(Namespace::Type, &p.name)?;
        for a in &p.arg_types {
            if !self.is_type(a) {
                return Err(KernelError::UnknownReference(a.clone()));
            }
        }
        // rules may mention the predicate itself
        let mut with_self = self.clone();
        with_self
            .preds
            .insert(p.name.clone(), Arc::new(InductivePredicate { rules: Vec::new(), ..p.clone() }));
        let mut seen = std::collections::BTreeSet::new();
        for r in &p.rules {
            self.fresh_in(Namespace::Constructor, &r.name)?;
            if !seen.insert(&r.name) {
                return Err(KernelError::DuplicateName { namespace: Namespace::Constructor, name: r.name.clone() });
            }
            with_self.check_closed_formula(&r.statement)?;
            match conclusion_of(&r.statement) {
                Formula::Pred(head, _) if head == &p.name => {}
                _ => {
                    return Err(KernelError::Malformed(format!(
                        "rule `{}` must conclude `{}`",
                        r.name, p.name
                    )))
                }
            }
        }
        for (i, r) in p.rules.iter().enumerate() {
            self.rules.insert(r.name.clone(), (p.name.clone(), i));
        }
        self.preds.insert(p.name.clone(), Arc::new(p.clone()));
        Ok(())
    }

    fn add_fixpoint(&mut self, f: &FixpointFn) -> KernelResult<()> {
        self.fresh_in(Namespace::Function, &f.name)?;
        if self.ctors.contains_key(&f.name) {
            return Err(KernelError::DuplicateName { namespace: Namespace::Constructor, name: f.name.clone() });
        }
        for p in &f.params {
            if !self.is_type(&p.ty) {
                return Err(KernelError::UnknownReference(p.ty.clone()));
            }
        }
        if !self.is_type(&f.ret) {
            return Err(KernelError::UnknownReference(f.ret.clone()));
        }
        let scrutinee = f
            .params
            .get(f.decreasing)
            .ok_or_else(|| KernelError::Malformed(format!("`{}` has no decreasing parameter", f.name)))?;
        let ty = self
            .inductive(&scrutinee.ty)
            .ok_or_else(|| KernelError::UnknownReference(scrutinee.ty.clone()))?
            .clone();
        if f.branches.len() != ty.ctors.len() {
            return Err(KernelError::Malformed(format!("`{}` must have one branch per constructor of `{}`", f.name, ty.name)));
        }
        let mut with_self = self.clone();
        with_self.fixpoints.insert(f.name.clone(), Arc::new(f.clone()));
        for (branch, ctor) in f.branches.iter().zip(&ty.ctors) {
            if branch.ctor != ctor.name {
                return Err(KernelError::Malformed(format!(
                    "branch for `{}` out of order (expected `{}`)",
                    branch.ctor, ctor.name
                )));
            }
            if branch.binders.len() != ctor.args.len() {
                return Err(KernelError::ArityMismatch {
                    name: ctor.name.clone(),
                    expected: ctor.args.len(),
                    found: branch.binders.len(),
                });
            }
            let mut scope: Vec<(Name, Name)> = f.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
            scope.extend(branch.binders.iter().cloned().zip(ctor.args.iter().cloned()));
            let body_ty = with_self.type_of(&scope, &branch.body)?;
            if body_ty != f.ret {
                return Err(KernelError::IllTyped(format!(
                    "branch `{}` of `{}` has type `{}`, expected `{}`",
                    ctor.name, f.name, body_ty, f.ret
                )));
            }
            let structural: Vec<&Name> = branch
                .binders
                .iter()
                .zip(&ctor.args)
                .filter(|(_, t)| **t == scrutinee.ty)
                .map(|(b, _)| b)
                .collect();
            check_descent(f, &branch.body, &structural)?;
        }
        self.fixpoints.insert(f.name.clone(), Arc::new(f.clone()));
        Ok(())
    }

    fn add_notation(&mut self, n: &Notation) -> KernelResult<()> {
        if self.notation(n.kind).is_some() {
            return Err(KernelError::DuplicateName { namespace: Namespace::Function, name: n.target.clone() });
        }
        let (args, _) = self.signature(&n.target).ok_or_else(|| KernelError::UnknownReference(n.target.clone()))?;
        if args.len() != n.kind.arity() {
            return Err(KernelError::ArityMismatch { name: n.target.clone(), expected: n.kind.arity(), found: args.len() });
        }
        self.notations.insert(n.kind.into(), n.target.clone());
        Ok(())
    }

    fn add_lemma(&mut self, l: &Lemma) -> KernelResult<()> {
        self.fresh_in(Namespace::Lemma, &l.name)?;
        self.check_closed_formula(&l.statement)?;
        self.lemmas.insert(l.name.clone(), l.statement.clone());
        Ok(())
    }

    fn add_tactic(&mut self, t: &TacticDef) -> KernelResult<()> {
        self.fresh_in(Namespace::Tactic, &t.name)?;
        for called in t.body.calls() {
            if called != t.name && !self.tactics.contains_key(&called) {
                return Err(KernelError::UnknownReference(called));
            }
        }
        self.tactics.insert(t.name.clone(), Arc::new(t.clone()));
        Ok(())
    }

    // ------------------------------------------------------------------
    // typing

    pub fn type_of(&self, scope: &[(Name, Name)], t: &Term) -> KernelResult<Name> {
        match t {
            Term::Var(x) => scope
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, ty)| ty.clone())
                .ok_or_else(|| KernelError::UnknownReference(x.clone())),
            Term::Ctor(h, args) | Term::App(h, args) => {
                let is_ctor = matches!(t, Term::Ctor(..));
                let (params, ret) = match (self.head(h), is_ctor) {
                    (Some(Head::Ctor { ty, index }), true) => (ty.ctors[index].args.clone(), ty.name.clone()),
                    (Some(Head::Fix(f)), false) => (f.params.iter().map(|p| p.ty.clone()).collect(), f.ret.clone()),
                    _ => return Err(KernelError::UnknownReference(h.clone())),
                };
                if params.len() != args.len() {
                    return Err(KernelError::ArityMismatch { name: h.clone(), expected: params.len(), found: args.len() });
                }
                for (a, expected) in args.iter().zip(&params) {
                    let found = self.type_of(scope, a)?;
                    if &found != expected {
                        return Err(KernelError::IllTyped(format!(
                            "argument `{a}` of `{h}` has type `{found}`, expected `{expected}`"
                        )));
                    }
                }
                Ok(ret)
            }
        }
    }

    pub fn check_formula(&self, scope: &[(Name, Name)], f: &Formula) -> KernelResult<()> {
        match f {
            Formula::Eq { lhs, rhs, ty } => {
                let l = self.type_of(scope, lhs)?;
                let r = self.type_of(scope, rhs)?;
                if &l != ty || &r != ty {
                    return Err(KernelError::IllTyped(format!("equation `{f}` is not at type `{ty}`")));
                }
                Ok(())
            }
            Formula::Pred(p, args) => {
                let pred = self.predicate(p).ok_or_else(|| KernelError::UnknownReference(p.clone()))?;
                if pred.arg_types.len() != args.len() {
                    return Err(KernelError::ArityMismatch { name: p.clone(), expected: pred.arg_types.len(), found: args.len() });
                }
                for (a, expected) in args.iter().zip(&pred.arg_types) {
                    let found = self.type_of(scope, a)?;
                    if &found != expected {
                        return Err(KernelError::IllTyped(format!(
                            "argument `{a}` of `{p}` has type `{found}`, expected `{expected}`"
                        )));
                    }
                }
                Ok(())
            }
            Formula::Imp(a, b) => {
                self.check_formula(scope, a)?;
                self.check_formula(scope, b)
            }
            Formula::Forall { var, ty, body } => {
                if !self.is_type(ty) {
                    return Err(KernelError::UnknownReference(ty.clone()));
                }
                let mut inner = scope.to_vec();
                inner.push((var.clone(), ty.clone()));
                self.check_formula(&inner, body)
            }
        }
    }

    pub fn check_closed_formula(&self, f: &Formula) -> KernelResult<()> {
        self.check_formula(&[], f)
    }
}

/// The innermost conclusion after stripping every `∀` and `->`.
pub fn conclusion_of(f: &Formula) -> &Formula {
    match f {
        Formula::Imp(_, b) => conclusion_of(b),
        Formula::Forall { body, .. } => conclusion_of(body),
        other => other,
    }
}

fn check_descent(f: &FixpointFn, t: &Term, structural: &[&Name]) -> KernelResult<()> {
    match t {
        Term::Var(_) => Ok(()),
        Term::Ctor(_, args) => args.iter().try_for_each(|a| check_descent(f, a, structural)),
        Term::App(g, args) => {
            if g == &f.name {
                match args.get(f.decreasing) {
                    Some(Term::Var(x)) if structural.contains(&x) => {}
                    Some(arg) => {
                        return Err(KernelError::TerminationCheck {
                            name: f.name.clone(),
                            reason: format!("recursive call on `{arg}`, which is not a strict subterm of the matched argument"),
                        });
                    }
                    None => {
                        return Err(KernelError::ArityMismatch {
                            name: f.name.clone(),
                            expected: f.params.len(),
                            found: args.len(),
                        })
                    }
                }
            }
            args.iter().try_for_each(|a| check_descent(f, a, structural))
        }
    }
}
