//! Proof trees over sequents and the checker that validates them.
//!
//! Premises are linked to their parent by exact sequent equality; the only
//! places where conversion is allowed are inside the rules that say so
//! (use, reflexivity, conversion). A node whose conclusion is edited is
//! therefore always caught, either by its parent or by the root check.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::env::{Environment, Head};
use super::name::Name;
use super::normalize::{convertible, normalize};
use super::state::{Hyp, HypKind, ProofState};
use super::term::{Formula, Term};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Hypothesis(Name),
    Lemma(Name),
    Rule(Name),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Rewrite occurrences of the left side by the right side.
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Case {
    pub ctor: Name,
    pub args: Vec<Name>,
    /// One name per recursive argument, empty for a case split.
    pub ihs: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    ForallIntro { var: Name },
    ImpIntro { hyp: Name },
    /// Peel `depth` leading quantifiers and implications off the source.
    /// Quantifiers consume `inst` in order; implications become premises.
    Use { source: Source, depth: usize, inst: Vec<(Name, Term)> },
    Reflexivity,
    Symmetry,
    Congruence,
    /// Premises: the equation, then the rewritten goal.
    Rewrite { dir: Direction, path: Vec<usize> },
    Induction { var: Name, cases: Vec<Case> },
    CaseSplit { var: Name, cases: Vec<Case> },
    /// Replace the goal by a convertible one.
    Conversion,
}

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Derivation {
    pub rule: Rule,
    pub conclusion: ProofState,
    pub premises: Vec<Derivation>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Derivation")
            .field("rule", &self.rule)
            .field("goal", &self.conclusion.goal)
            .field("premises", &self.premises)
            .finish()
    }
}

impl Derivation {
    pub fn new(rule: Rule, conclusion: ProofState, premises: Vec<Derivation>) -> Self {
        Derivation { rule, conclusion, premises }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Paths of every node in pre-order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        fn walk(d: &Derivation, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(path.clone());
            for (i, p) in d.premises.iter().enumerate() {
                path.push(i);
                walk(p, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn node(&self, path: &[usize]) -> Option<&Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get(*i)?.node(rest),
        }
    }

    pub fn node_mut(&mut self, path: &[usize]) -> Option<&mut Derivation> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.premises.get_mut(*i)?.node_mut(rest),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    /// The conclusion does not have the shape the rule requires.
    ShapeMismatch,
    PremiseCount { expected: usize, found: usize },
    PremiseMismatch { index: usize },
    NormalFormsDiffer,
    MissingCase,
    UnknownReference(Name),
    NameClash(Name),
    IllTyped(String),
    /// Hypothesis depends on the induction variable.
    DependentHypothesis(Name),
    /// Rewriting at the position would capture a bound variable.
    Capture,
    /// The root does not prove the claimed statement.
    WrongStatement,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::ShapeMismatch => write!(f, "conclusion does not fit the rule"),
            Reason::PremiseCount { expected, found } => write!(f, "expected {expected} premise(s), found {found}"),
            Reason::PremiseMismatch { index } => write!(f, "premise {index} does not match"),
            Reason::NormalFormsDiffer => write!(f, "normal forms differ"),
            Reason::MissingCase => write!(f, "missing or misordered case"),
            Reason::UnknownReference(n) => write!(f, "unknown reference `{n}`"),
            Reason::NameClash(n) => write!(f, "name `{n}` already in context"),
            Reason::IllTyped(m) => write!(f, "ill-typed: {m}"),
            Reason::DependentHypothesis(n) => write!(f, "hypothesis `{n}` depends on the induction variable"),
            Reason::Capture => write!(f, "rewrite would capture a bound variable"),
            Reason::WrongStatement => write!(f, "root does not conclude the statement"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("derivation rejected at {path:?}: {reason}")]
pub struct Rejection {
    pub reason: Reason,
    pub path: Vec<usize>,
}

/// Checks every node of `d`.
pub fn check_derivation(env: &Environment, d: &Derivation) -> Result<(), Rejection> {
    let mut path = Vec::new();
    check_node(env, d, &mut path)
}

/// Checks `d` and that it proves `statement` from no hypotheses.
pub fn check_proof(env: &Environment, statement: &Formula, d: &Derivation) -> Result<(), Rejection> {
    if d.conclusion != ProofState::new(statement.clone()) {
        return Err(Rejection { reason: Reason::WrongStatement, path: Vec::new() });
    }
    check_derivation(env, d)
}

fn check_node(env: &Environment, d: &Derivation, path: &mut Vec<usize>) -> Result<(), Rejection> {
    check_rule(env, d).map_err(|reason| Rejection { reason, path: path.clone() })?;
    for (i, p) in d.premises.iter().enumerate() {
        path.push(i);
        check_node(env, p, path)?;
        path.pop();
    }
    Ok(())
}

fn expect_premises(d: &Derivation, expected: &[ProofState]) -> Result<(), Reason> {
    if d.premises.len() != expected.len() {
        return Err(Reason::PremiseCount { expected: expected.len(), found: d.premises.len() });
    }
    for (index, (p, e)) in d.premises.iter().zip(expected).enumerate() {
        if &p.conclusion != e {
            return Err(Reason::PremiseMismatch { index });
        }
    }
    Ok(())
}

fn fresh_for(state: &ProofState, name: &Name) -> Result<(), Reason> {
    if state.has(name.as_str()) || !Name::is_valid(name.as_str()) {
        return Err(Reason::NameClash(name.clone()));
    }
    Ok(())
}

fn check_rule(env: &Environment, d: &Derivation) -> Result<(), Reason> {
    let c = &d.conclusion;
    well_formed(env, c)?;
    match &d.rule {
        Rule::ForallIntro { var } => {
            let Formula::Forall { var: x, ty, body } = &c.goal else {
                return Err(Reason::ShapeMismatch);
            };
            fresh_for(c, var)?;
            let premise = c.push(Hyp::var(var.clone(), ty.clone()), body.subst1(x, Term::Var(var.clone())));
            expect_premises(d, &[premise])
        }
        Rule::ImpIntro { hyp } => {
            let Formula::Imp(a, b) = &c.goal else {
                return Err(Reason::ShapeMismatch);
            };
            fresh_for(c, hyp)?;
            expect_premises(d, &[c.push(Hyp::prop(hyp.clone(), (**a).clone()), (**b).clone())])
        }
        Rule::Use { source, depth, inst } => {
            let mut statement = match source {
                Source::Hypothesis(h) => match c.hyp(h).map(|h| &h.kind) {
                    Some(HypKind::Prop(p)) => p.clone(),
                    _ => return Err(Reason::UnknownReference(h.clone())),
                },
                Source::Lemma(l) => env.lemma(l).cloned().ok_or_else(|| Reason::UnknownReference(l.clone()))?,
                Source::Rule(r) => {
                    env.rule(r).map(|(_, rule)| rule.statement.clone()).ok_or_else(|| Reason::UnknownReference(r.clone()))?
                }
            };
            let scope = c.scope();
            let mut terms = inst.iter();
            let mut premises = Vec::new();
            for _ in 0..*depth {
                statement = match statement {
                    Formula::Forall { var, ty, body } => {
                        let Some((name, t)) = terms.next() else {
                            return Err(Reason::ShapeMismatch);
                        };
                        if name != &var {
                            return Err(Reason::ShapeMismatch);
                        }
                        match env.type_of(&scope, t) {
                            Ok(found) if found == ty => {}
                            Ok(found) => return Err(Reason::IllTyped(format!("`{t}` : `{found}`, expected `{ty}`"))),
                            Err(e) => return Err(Reason::IllTyped(e.to_string())),
                        }
                        body.subst1(&var, t.clone())
                    }
                    Formula::Imp(a, b) => {
                        premises.push(c.with_goal(*a));
                        *b
                    }
                    _ => return Err(Reason::ShapeMismatch),
                };
            }
            if terms.next().is_some() {
                return Err(Reason::ShapeMismatch);
            }
            if !convertible(env, &statement, &c.goal) {
                return Err(Reason::NormalFormsDiffer);
            }
            expect_premises(d, &premises)
        }
        Rule::Reflexivity => {
            let Formula::Eq { lhs, rhs, .. } = &c.goal else {
                return Err(Reason::ShapeMismatch);
            };
            if normalize(env, lhs) != normalize(env, rhs) {
                return Err(Reason::NormalFormsDiffer);
            }
            expect_premises(d, &[])
        }
        Rule::Symmetry => {
            let Formula::Eq { lhs, rhs, ty } = &c.goal else {
                return Err(Reason::ShapeMismatch);
            };
            expect_premises(d, &[c.with_goal(Formula::eq(rhs.clone(), lhs.clone(), ty.clone()))])
        }
        Rule::Congruence => {
            let Formula::Eq { lhs, rhs, .. } = &c.goal else {
                return Err(Reason::ShapeMismatch);
            };
            let (h, a, b) = match (lhs, rhs) {
                (Term::Ctor(f, a), Term::Ctor(g, b)) | (Term::App(f, a), Term::App(g, b)) if f == g => (f, a, b),
                _ => return Err(Reason::ShapeMismatch),
            };
            let (arg_types, _) = match env.head(h) {
                Some(Head::Ctor { .. }) | Some(Head::Fix(_)) => env.signature(h).expect("head has a signature"),
                None => return Err(Reason::UnknownReference(h.clone())),
            };
            if arg_types.len() != a.len() || a.len() != b.len() {
                return Err(Reason::ShapeMismatch);
            }
            let premises: Vec<ProofState> = a
                .iter()
                .zip(b)
                .zip(&arg_types)
                .map(|((x, y), ty)| c.with_goal(Formula::eq(x.clone(), y.clone(), ty.clone())))
                .collect();
            expect_premises(d, &premises)
        }
        Rule::Rewrite { dir, path } => {
            let [eq, rest] = d.premises.as_slice() else {
                return Err(Reason::PremiseCount { expected: 2, found: d.premises.len() });
            };
            if eq.conclusion.hyps != c.hyps {
                return Err(Reason::PremiseMismatch { index: 0 });
            }
            let Formula::Eq { lhs, rhs, .. } = &eq.conclusion.goal else {
                return Err(Reason::PremiseMismatch { index: 0 });
            };
            let (from, to) = match dir {
                Direction::Forward => (lhs, rhs),
                Direction::Backward => (rhs, lhs),
            };
            let (at, bound) = c.goal.term_at(path).ok_or(Reason::ShapeMismatch)?;
            if at != from {
                return Err(Reason::ShapeMismatch);
            }
            if bound.iter().any(|b| from.mentions(b) || to.mentions(b)) {
                return Err(Reason::Capture);
            }
            let rewritten = c.goal.replace_at(path, to).ok_or(Reason::ShapeMismatch)?;
            if rest.conclusion != c.with_goal(rewritten) {
                return Err(Reason::PremiseMismatch { index: 1 });
            }
            Ok(())
        }
        Rule::Induction { var, cases } => check_cases(env, d, var, cases, true),
        Rule::CaseSplit { var, cases } => check_cases(env, d, var, cases, false),
        Rule::Conversion => {
            let [p] = d.premises.as_slice() else {
                return Err(Reason::PremiseCount { expected: 1, found: d.premises.len() });
            };
            if p.conclusion.hyps != c.hyps {
                return Err(Reason::PremiseMismatch { index: 0 });
            }
            if !convertible(env, &p.conclusion.goal, &c.goal) {
                return Err(Reason::NormalFormsDiffer);
            }
            Ok(())
        }
    }
}

/// Distinct names, and every statement well-typed in the variables
/// declared before it.
fn well_formed(env: &Environment, c: &ProofState) -> Result<(), Reason> {
    if !c.well_scoped() {
        return Err(Reason::ShapeMismatch);
    }
    let mut scope = Vec::new();
    for h in &c.hyps {
        match &h.kind {
            HypKind::Var(ty) => {
                if !env.is_type(ty) {
                    return Err(Reason::UnknownReference(ty.clone()));
                }
                scope.push((h.name.clone(), ty.clone()));
            }
            HypKind::Prop(p) => env.check_formula(&scope, p).map_err(|e| Reason::IllTyped(e.to_string()))?,
        }
    }
    env.check_formula(&scope, &c.goal).map_err(|e| Reason::IllTyped(e.to_string()))
}

/// The subgoals of structural induction (or case analysis when
/// `with_ih` is false) on `var` with the given case names.
pub fn case_premises(
    env: &Environment,
    c: &ProofState,
    var: &Name,
    cases: &[Case],
    with_ih: bool,
) -> Result<Vec<ProofState>, Reason> {
    let ty_name = c.var_type(var).ok_or_else(|| Reason::UnknownReference(var.clone()))?;
    let ty = env.inductive(ty_name).ok_or_else(|| Reason::UnknownReference(ty_name.clone()))?;
    if let Some(h) = c.hyps.iter().find(|h| matches!(&h.kind, HypKind::Prop(p) if p.mentions(var))) {
        return Err(Reason::DependentHypothesis(h.name.clone()));
    }
    if cases.len() != ty.ctors.len() {
        return Err(Reason::MissingCase);
    }
    let base: Vec<Hyp> = c.hyps.iter().filter(|h| &h.name != var).cloned().collect();
    let mut out = Vec::with_capacity(cases.len());
    for (case, ctor) in cases.iter().zip(&ty.ctors) {
        if case.ctor != ctor.name || case.args.len() != ctor.args.len() {
            return Err(Reason::MissingCase);
        }
        let recursive: Vec<&Name> =
            case.args.iter().zip(&ctor.args).filter(|(_, t)| *t == &ty.name).map(|(a, _)| a).collect();
        let expected_ihs = if with_ih { recursive.len() } else { 0 };
        if case.ihs.len() != expected_ihs {
            return Err(Reason::MissingCase);
        }
        let mut hyps = base.clone();
        for name in case.args.iter().chain(&case.ihs) {
            if hyps.iter().any(|h| &h.name == name) || !Name::is_valid(name.as_str()) {
                return Err(Reason::NameClash(name.clone()));
            }
            // reserve the name before the next one is checked
            hyps.push(Hyp::var(name.clone(), ""));
        }
        hyps.truncate(base.len());
        for (a, t) in case.args.iter().zip(&ctor.args) {
            hyps.push(Hyp::var(a.clone(), t.clone()));
        }
        for (ih, r) in case.ihs.iter().zip(&recursive) {
            hyps.push(Hyp::prop(ih.clone(), c.goal.subst1(var, Term::Var((*r).clone()))));
        }
        let instance = Term::Ctor(ctor.name.clone(), case.args.iter().cloned().map(Term::Var).collect());
        out.push(ProofState::with_hyps(hyps, c.goal.subst1(var, instance)));
    }
    Ok(out)
}

fn check_cases(env: &Environment, d: &Derivation, var: &Name, cases: &[Case], with_ih: bool) -> Result<(), Reason> {
    let premises = case_premises(env, &d.conclusion, var, cases, with_ih)?;
    expect_premises(d, &premises)
}
