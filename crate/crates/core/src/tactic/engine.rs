//! Backtracking interpreter. Every tactic yields a lazy stream of
//! successes; each success carries its open goals and a builder that turns
//! derivations of those goals into a derivation of the goal it ran on.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::fmt;
use std::iter;
use std::rc::Rc;
use std::sync::Arc;

use crate::kernel::{
    case_premises, convertible, match_formula, match_term, normalize, normalize_formula, Case, Derivation, Direction,
    Environment, Formula, HypKind, Hyp, Name, ProofState, Rule, Source, Term,
};
use crate::syntax::elab_goal_pattern;

use super::expr::TacticExpr;
use super::record::TacticRecord;

pub const DEFAULT_FUEL: usize = 1000;
const AUTO_DEPTH: usize = 5;

pub type Builder = Arc<dyn Fn(Vec<Derivation>) -> Derivation + Send + Sync>;

#[derive(Clone)]
pub struct Success {
    pub goals: Vec<ProofState>,
    pub builder: Builder,
    pub records: Vec<TacticRecord>,
}

impl fmt::Debug for Success {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Success").field("goals", &self.goals).field("records", &self.records.len()).finish()
    }
}

impl Success {
    fn leaf(goals: Vec<ProofState>, builder: Builder) -> Self {
        Success { goals, builder, records: Vec::new() }
    }

    /// Leaves the goal as it is.
    fn identity(state: ProofState) -> Self {
        Success::leaf(vec![state], Arc::new(|ds| ds.into_iter().next().expect("one derivation")))
    }

    /// Closes the goal with a finished derivation.
    fn closed(d: Derivation) -> Self {
        Success::leaf(Vec::new(), Arc::new(move |_| d.clone()))
    }

    /// Builds the derivation once every open goal has one.
    pub fn build(&self, subproofs: Vec<Derivation>) -> Derivation {
        (self.builder)(subproofs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("unknown reference `{0}`")]
    UnknownReference(Name),
}

pub type Outcome<'a> = Box<dyn Iterator<Item = Result<Success, ExecError>> + 'a>;
type Combos<'a> = Box<dyn Iterator<Item = Result<Vec<Success>, ExecError>> + 'a>;

/// Ends a stream right after its first error.
struct StopAfterErr<I> {
    inner: I,
    done: bool,
}

impl<I: Iterator<Item = Result<T, E>>, T, E> Iterator for StopAfterErr<I> {
    type Item = Result<T, E>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.inner.next();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

/// Chains `a`'s successes with `b`'s outcome, created only once reached.
struct Then<'a> {
    first: Outcome<'a>,
    rest: Option<Box<dyn FnOnce() -> Outcome<'a> + 'a>>,
}

impl<'a> Iterator for Then<'a> {
    type Item = Result<Success, ExecError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(x) = self.first.next() {
                return Some(x);
            }
            let make = self.rest.take()?;
            self.first = make();
        }
    }
}

/// Sequential composition: `outer` then one success per goal.
fn compose(outer: &Success, subs: Vec<Success>) -> Success {
    let mut goals = Vec::new();
    let mut records = outer.records.clone();
    let mut counts = Vec::with_capacity(subs.len());
    let mut builders = Vec::with_capacity(subs.len());
    for s in subs {
        counts.push(s.goals.len());
        goals.extend(s.goals);
        records.extend(s.records);
        builders.push(s.builder);
    }
    let outer_builder = outer.builder.clone();
    let builder: Builder = Arc::new(move |ds: Vec<Derivation>| {
        let mut it = ds.into_iter();
        let parts = builders.iter().zip(&counts).map(|(b, n)| b(it.by_ref().take(*n).collect())).collect();
        outer_builder(parts)
    });
    Success { goals, builder, records }
}

fn node(rule: Rule, state: &ProofState) -> Builder {
    let state = state.clone();
    Arc::new(move |ds| Derivation::new(rule.clone(), state.clone(), ds))
}

/// Instantiates the first `depth` layers of `statement` in order.
fn peel(statement: &Formula, depth: usize, terms: &[Term]) -> Option<(Vec<(Name, Term)>, Vec<Formula>, Formula)> {
    let mut f = statement.clone();
    let mut terms = terms.iter();
    let mut inst = Vec::new();
    let mut premises = Vec::new();
    for _ in 0..depth {
        f = match f {
            Formula::Forall { var, body, .. } => {
                let t = terms.next()?.clone();
                inst.push((var.clone(), t.clone()));
                body.subst1(&var, t)
            }
            Formula::Imp(a, b) => {
                premises.push(*a);
                *b
            }
            _ => return None,
        };
    }
    Some((inst, premises, f))
}

fn layers(f: &Formula) -> usize {
    match f {
        Formula::Forall { body, .. } => 1 + layers(body),
        Formula::Imp(_, b) => 1 + layers(b),
        _ => 0,
    }
}

/// Peels `depth` layers, replacing quantified variables by placeholders.
fn open(statement: &Formula, depth: usize) -> (Formula, Vec<(Name, Name)>) {
    let mut f = statement.clone();
    let mut placeholders = Vec::new();
    for k in 0..depth {
        f = match f {
            Formula::Forall { var, ty, body } => {
                let ph = Name::new(format!("?{k}"));
                placeholders.push((ph.clone(), ty));
                body.subst1(&var, Term::Var(ph))
            }
            Formula::Imp(_, b) => *b,
            other => return (other, placeholders),
        };
    }
    (f, placeholders)
}

#[derive(Clone)]
pub struct Engine<'a> {
    env: &'a Environment,
    fuel: Rc<Cell<usize>>,
}

impl<'a> Engine<'a> {
    pub fn new(env: &'a Environment, fuel: usize) -> Self {
        Engine { env, fuel: Rc::new(Cell::new(fuel)) }
    }

    pub fn fuel_left(&self) -> usize {
        self.fuel.get()
    }

    fn burn(&self) -> Result<(), ExecError> {
        match self.fuel.get() {
            0 => Err(ExecError::FuelExhausted),
            f => {
                self.fuel.set(f - 1);
                Ok(())
            }
        }
    }

    /// All successes of `t` on `state`. With `record`, successes carry the
    /// decomposed records of what ran.
    pub fn exec(&self, state: ProofState, t: &'a TacticExpr, record: bool) -> Outcome<'a> {
        let out: Outcome<'a> = match t {
            TacticExpr::Seq(a, b) => self.seq(state, a, b, record),
            TacticExpr::Alt(a, b) => {
                let this = self.clone();
                let again = state.clone();
                Box::new(Then {
                    first: self.exec(state, a, record),
                    rest: Some(Box::new(move || this.exec(again, b, record))),
                })
            }
            TacticExpr::Solve(_) | TacticExpr::Repeat(_) | TacticExpr::Call(_) | TacticExpr::MatchGoal(_) => {
                let inner = self.opaque(state.clone(), t);
                if record {
                    Box::new(inner.map(move |r| {
                        r.map(|mut s| {
                            s.records = vec![TacticRecord { before: state.clone(), tactic: t.clone(), after: s.goals.clone() }];
                            s
                        })
                    }))
                } else {
                    inner
                }
            }
            _ => {
                let result = self.atomic(&state, t);
                Box::new(iter::once(result).filter_map(move |r| match r {
                    Ok(Some(mut s)) => {
                        if record {
                            s.records = vec![TacticRecord { before: state.clone(), tactic: t.clone(), after: s.goals.clone() }];
                        }
                        Some(Ok(s))
                    }
                    Ok(None) => None,
                    Err(e) => Some(Err(e)),
                }))
            }
        };
        Box::new(StopAfterErr { inner: out, done: false })
    }

    fn seq(&self, state: ProofState, a: &'a TacticExpr, b: &'a TacticExpr, record: bool) -> Outcome<'a> {
        let this = self.clone();
        Box::new(self.exec(state, a, record).flat_map(move |r| -> Outcome<'a> {
            match r {
                Err(e) => Box::new(iter::once(Err(e))),
                Ok(s) => {
                    let goals = Rc::new(s.goals.clone());
                    Box::new(this.each_goal(goals, 0, b, record).map(move |combo| combo.map(|subs| compose(&s, subs))))
                }
            }
        }))
    }

    fn each_goal(&self, goals: Rc<Vec<ProofState>>, i: usize, t: &'a TacticExpr, record: bool) -> Combos<'a> {
        if i == goals.len() {
            return Box::new(iter::once(Ok(Vec::new())));
        }
        let this = self.clone();
        let goal = goals[i].clone();
        Box::new(self.exec(goal, t, record).flat_map(move |r| -> Combos<'a> {
            match r {
                Err(e) => Box::new(iter::once(Err(e))),
                Ok(first) => Box::new(this.each_goal(goals.clone(), i + 1, t, record).map(move |rest| {
                    rest.map(|mut v| {
                        v.insert(0, first.clone());
                        v
                    })
                })),
            }
        }))
    }

    fn opaque(&self, state: ProofState, t: &'a TacticExpr) -> Outcome<'a> {
        match t {
            TacticExpr::Solve(inner) => {
                Box::new(self.exec(state, inner, false).filter(|r| r.as_ref().map_or(true, |s| s.goals.is_empty())))
            }
            TacticExpr::Repeat(inner) => {
                let this = self.clone();
                Box::new(iter::once(()).map(move |_| this.repeat(state.clone(), inner)))
            }
            TacticExpr::Call(name) => {
                let this = self.clone();
                Box::new(iter::once(()).flat_map(move |_| -> Outcome<'a> {
                    if let Err(e) = this.burn() {
                        return Box::new(iter::once(Err(e)));
                    }
                    match this.env.tactic(name) {
                        Some(def) => this.exec(state.clone(), &def.body, false),
                        None => Box::new(iter::once(Err(ExecError::UnknownReference(name.clone())))),
                    }
                }))
            }
            TacticExpr::MatchGoal(arms) => {
                let this = self.clone();
                Box::new(arms.iter().flat_map(move |arm| -> Outcome<'a> {
                    if this.arm_matches(&state, &arm.pattern) {
                        this.exec(state.clone(), &arm.body, false)
                    } else {
                        Box::new(iter::empty())
                    }
                }))
            }
            _ => unreachable!("not an opaque combinator"),
        }
    }

    fn arm_matches(&self, state: &ProofState, pattern: &crate::syntax::Expr) -> bool {
        match elab_goal_pattern(self.env, &state.scope(), pattern) {
            Ok(p) => match &p.formula {
                None => true,
                Some(f) => match_formula(f, &state.goal, &p.vars).is_some(),
            },
            Err(_) => false,
        }
    }

    fn repeat(&self, state: ProofState, t: &'a TacticExpr) -> Result<Success, ExecError> {
        self.burn()?;
        let first = self.exec(state.clone(), t, false).next();
        match first {
            None => Ok(Success::identity(state)),
            Some(Err(e)) => Err(e),
            Some(Ok(s)) => {
                if s.goals.len() == 1 && s.goals[0] == state {
                    return Ok(Success::identity(state));
                }
                let subs = s.goals.iter().map(|g| self.repeat(g.clone(), t)).collect::<Result<Vec<_>, _>>()?;
                Ok(compose(&s, subs))
            }
        }
    }

    // ------------------------------------------------------------------
    // atomic tactics

    fn atomic(&self, state: &ProofState, t: &TacticExpr) -> Result<Option<Success>, ExecError> {
        Ok(match t {
            TacticExpr::Intro(name) => self.intro(state, name.as_ref()),
            TacticExpr::Intros => {
                let mut cur = self.intro(state, None);
                let Some(mut acc) = cur.take() else {
                    return Ok(None);
                };
                while let Some(next) = self.intro(&acc.goals[0], None) {
                    acc = compose(&acc, vec![next]);
                }
                Some(acc)
            }
            TacticExpr::Apply(name) => {
                let (source, statement) = self.reference(state, name)?;
                self.apply(state, source, &statement)
            }
            TacticExpr::Exact(name) => {
                let (source, statement) = self.reference(state, name)?;
                self.apply(state, source, &statement).filter(|s| s.goals.is_empty())
            }
            TacticExpr::Rewrite(dir, name) => {
                let (source, statement) = self.reference(state, name)?;
                self.rewrite(state, *dir, source, &statement)
            }
            TacticExpr::Reflexivity => self.reflexivity(state).map(Success::closed),
            TacticExpr::Symmetry => match &state.goal {
                Formula::Eq { lhs, rhs, ty } => {
                    let goal = state.with_goal(Formula::eq(rhs.clone(), lhs.clone(), ty.clone()));
                    Some(Success::leaf(vec![goal], node(Rule::Symmetry, state)))
                }
                _ => None,
            },
            TacticExpr::Assumption => self.assumption(state).map(Success::closed),
            TacticExpr::FEqual => self.f_equal(state),
            TacticExpr::Simpl => {
                let goal = normalize_formula(self.env, &state.goal);
                if goal == state.goal {
                    Some(Success::identity(state.clone()))
                } else {
                    Some(Success::leaf(vec![state.with_goal(goal)], node(Rule::Conversion, state)))
                }
            }
            TacticExpr::Induction(x) => self.cases(state, x, true),
            TacticExpr::Destruct(x) => self.cases(state, x, false),
            TacticExpr::Auto => Some(match self.auto(state, AUTO_DEPTH) {
                Some(d) => Success::closed(d),
                None => Success::identity(state.clone()),
            }),
            TacticExpr::Fail => None,
            _ => unreachable!("not an atomic tactic"),
        })
    }

    fn intro(&self, state: &ProofState, name: Option<&Name>) -> Option<Success> {
        if name.is_some_and(|n| state.has(n.as_str())) {
            return None;
        }
        match &state.goal {
            Formula::Forall { var, ty, body } => {
                let v = name.cloned().unwrap_or_else(|| state.fresh(var.as_str()));
                let goal = state.push(Hyp::var(v.clone(), ty.clone()), body.subst1(var, Term::Var(v.clone())));
                Some(Success::leaf(vec![goal], node(Rule::ForallIntro { var: v }, state)))
            }
            Formula::Imp(a, b) => {
                let h = name.cloned().unwrap_or_else(|| state.fresh("H"));
                let goal = state.push(Hyp::prop(h.clone(), (**a).clone()), (**b).clone());
                Some(Success::leaf(vec![goal], node(Rule::ImpIntro { hyp: h }, state)))
            }
            _ => None,
        }
    }

    /// Hypotheses shadow lemmas, which shadow predicate rules.
    fn reference(&self, state: &ProofState, name: &Name) -> Result<(Source, Formula), ExecError> {
        if let Some(Hyp { kind: HypKind::Prop(p), .. }) = state.hyp(name) {
            return Ok((Source::Hypothesis(name.clone()), p.clone()));
        }
        if let Some(l) = self.env.lemma(name) {
            return Ok((Source::Lemma(name.clone()), l.clone()));
        }
        if let Some((_, rule)) = self.env.rule(name) {
            return Ok((Source::Rule(name.clone()), rule.statement.clone()));
        }
        Err(ExecError::UnknownReference(name.clone()))
    }

    fn instantiate(&self, state: &ProofState, placeholders: &[(Name, Name)], sigma: &crate::kernel::Subst) -> Option<Vec<Term>> {
        let scope = state.scope();
        placeholders
            .iter()
            .map(|(ph, ty)| {
                let t = sigma.get(ph)?;
                (self.env.type_of(&scope, t).ok()? == *ty).then(|| t.clone())
            })
            .collect()
    }

    /// Deepest instantiation first, as Coq's `apply` does.
    fn apply(&self, state: &ProofState, source: Source, statement: &Formula) -> Option<Success> {
        let goal_nf = normalize_formula(self.env, &state.goal);
        for depth in (0..=layers(statement)).rev() {
            let (concl, placeholders) = open(statement, depth);
            let vars: BTreeSet<Name> = placeholders.iter().map(|(p, _)| p.clone()).collect();
            let Some(sigma) = match_formula(&normalize_formula(self.env, &concl), &goal_nf, &vars) else {
                continue;
            };
            let Some(terms) = self.instantiate(state, &placeholders, &sigma) else {
                continue;
            };
            let Some((inst, premises, concl)) = peel(statement, depth, &terms) else {
                continue;
            };
            if !convertible(self.env, &concl, &state.goal) {
                continue;
            }
            let goals = premises.into_iter().map(|p| state.with_goal(p)).collect();
            return Some(Success::leaf(goals, node(Rule::Use { source, depth, inst }, state)));
        }
        None
    }

    fn rewrite(&self, state: &ProofState, dir: Direction, source: Source, statement: &Formula) -> Option<Success> {
        let depth = layers(statement);
        let (concl, placeholders) = open(statement, depth);
        let Formula::Eq { lhs, rhs, .. } = &concl else {
            return None;
        };
        let from = match dir {
            Direction::Forward => lhs,
            Direction::Backward => rhs,
        };
        let vars: BTreeSet<Name> = placeholders.iter().map(|(p, _)| p.clone()).collect();
        for (path, at, bound) in state.goal.term_positions() {
            let Some(sigma) = match_term(from, at, &vars) else {
                continue;
            };
            if sigma.values().any(|t| bound.iter().any(|b| t.mentions(b))) {
                continue;
            }
            let Some(terms) = self.instantiate(state, &placeholders, &sigma) else {
                continue;
            };
            let Some((inst, sides, eq)) = peel(statement, depth, &terms) else {
                continue;
            };
            let Formula::Eq { lhs: l, rhs: r, .. } = &eq else {
                continue;
            };
            let (from_i, to_i) = match dir {
                Direction::Forward => (l, r),
                Direction::Backward => (r, l),
            };
            if from_i != at || bound.iter().any(|b| to_i.mentions(b)) {
                continue;
            }
            let Some(new_goal) = state.goal.replace_at(&path, to_i) else {
                continue;
            };
            let mut goals = vec![state.with_goal(new_goal)];
            goals.extend(sides.into_iter().map(|p| state.with_goal(p)));
            let eq_state = state.with_goal(eq.clone());
            let parent = state.clone();
            let use_rule = Rule::Use { source, depth, inst };
            let builder: Builder = Arc::new(move |ds: Vec<Derivation>| {
                let mut ds = ds.into_iter();
                let rest = ds.next().expect("rewritten goal");
                let eq_proof = Derivation::new(use_rule.clone(), eq_state.clone(), ds.collect());
                Derivation::new(Rule::Rewrite { dir, path: path.clone() }, parent.clone(), vec![eq_proof, rest])
            });
            return Some(Success::leaf(goals, builder));
        }
        None
    }

    fn reflexivity(&self, state: &ProofState) -> Option<Derivation> {
        match &state.goal {
            Formula::Eq { lhs, rhs, .. } if normalize(self.env, lhs) == normalize(self.env, rhs) => {
                Some(Derivation::new(Rule::Reflexivity, state.clone(), Vec::new()))
            }
            _ => None,
        }
    }

    /// Most recent hypothesis first.
    fn assumption(&self, state: &ProofState) -> Option<Derivation> {
        state.hyps.iter().rev().find_map(|h| match &h.kind {
            HypKind::Prop(p) if convertible(self.env, p, &state.goal) => Some(Derivation::new(
                Rule::Use { source: Source::Hypothesis(h.name.clone()), depth: 0, inst: Vec::new() },
                state.clone(),
                Vec::new(),
            )),
            _ => None,
        })
    }

    fn f_equal(&self, state: &ProofState) -> Option<Success> {
        let Formula::Eq { lhs, rhs, .. } = &state.goal else {
            return None;
        };
        let (head, a, b) = match (lhs, rhs) {
            (Term::Ctor(f, a), Term::Ctor(g, b)) | (Term::App(f, a), Term::App(g, b)) if f == g && a.len() == b.len() => {
                (f, a, b)
            }
            _ => return None,
        };
        let (arg_types, _) = self.env.signature(head)?;
        let mut slots: Vec<Option<Derivation>> = Vec::new();
        let mut goals = Vec::new();
        for ((x, y), ty) in a.iter().zip(b).zip(&arg_types) {
            let sub = state.with_goal(Formula::eq(x.clone(), y.clone(), ty.clone()));
            match self.reflexivity(&sub) {
                Some(d) => slots.push(Some(d)),
                None => {
                    slots.push(None);
                    goals.push(sub);
                }
            }
        }
        let parent = state.clone();
        let builder: Builder = Arc::new(move |ds: Vec<Derivation>| {
            let mut ds = ds.into_iter();
            let premises = slots.iter().map(|s| s.clone().unwrap_or_else(|| ds.next().expect("argument proof"))).collect();
            Derivation::new(Rule::Congruence, parent.clone(), premises)
        });
        Some(Success::leaf(goals, builder))
    }

    fn cases(&self, state: &ProofState, var: &Name, with_ih: bool) -> Option<Success> {
        let ty = state.var_type(var)?;
        let ind = self.env.inductive(ty)?;
        let mut taken: BTreeSet<String> =
            state.hyps.iter().filter(|h| &h.name != var).map(|h| h.name.to_string()).collect();
        let mut cases = Vec::new();
        for ctor in &ind.ctors {
            let mut reused = false;
            let mut args = Vec::new();
            let mut recursive = Vec::new();
            for t in &ctor.args {
                let is_rec = t == &ind.name;
                let base = if is_rec && !reused {
                    reused = true;
                    var.to_string()
                } else {
                    t.as_str().chars().next().map(|c| c.to_lowercase().collect()).unwrap_or_else(|| "x".to_string())
                };
                let name = crate::kernel::fresh_name(&base, |c| taken.contains(c));
                taken.insert(name.to_string());
                if is_rec {
                    recursive.push(name.clone());
                }
                args.push(name);
            }
            let mut ihs = Vec::new();
            if with_ih {
                for r in &recursive {
                    let name = crate::kernel::fresh_name(&format!("IH{r}"), |c| taken.contains(c));
                    taken.insert(name.to_string());
                    ihs.push(name);
                }
            }
            cases.push(Case { ctor: ctor.name.clone(), args, ihs });
        }
        let goals = case_premises(self.env, state, var, &cases, with_ih).ok()?;
        let rule = if with_ih {
            Rule::Induction { var: var.clone(), cases }
        } else {
            Rule::CaseSplit { var: var.clone(), cases }
        };
        Some(Success::leaf(goals, node(rule, state)))
    }

    /// Backward chaining with reflexivity, assumption and hypotheses.
    fn auto(&self, state: &ProofState, depth: usize) -> Option<Derivation> {
        if let Some(d) = self.reflexivity(state) {
            return Some(d);
        }
        if let Some(d) = self.assumption(state) {
            return Some(d);
        }
        if depth == 0 {
            return None;
        }
        for h in state.hyps.iter().rev() {
            let HypKind::Prop(p) = &h.kind else {
                continue;
            };
            let Some(s) = self.apply(state, Source::Hypothesis(h.name.clone()), p) else {
                continue;
            };
            if s.goals.is_empty() {
                continue;
            }
            let subs: Option<Vec<Derivation>> = s.goals.iter().map(|g| self.auto(g, depth - 1)).collect();
            if let Some(subs) = subs {
                return Some(s.build(subs));
            }
        }
        None
    }
}

/// Runs `t` and returns its successes, recording per the decomposition rule.
pub fn execute<'a>(env: &'a Environment, state: &ProofState, t: &'a TacticExpr, fuel: usize) -> Outcome<'a> {
    Engine::new(env, fuel).exec(state.clone(), t, true)
}

/// First success, as a tactic command takes it.
pub fn run_first(env: &Environment, state: &ProofState, t: &TacticExpr, fuel: usize) -> Result<Option<Success>, ExecError> {
    execute(env, state, t, fuel).next().transpose()
}

/// Composes successes that were each applied to the first open goal, in
/// that order, into one derivation. `None` if goals remain open.
pub fn assemble<'s>(steps: impl IntoIterator<Item = &'s Success>) -> Option<Derivation> {
    fn go<'s>(it: &mut impl Iterator<Item = &'s Success>) -> Option<Derivation> {
        let s = it.next()?;
        let children = (0..s.goals.len()).map(|_| go(it)).collect::<Option<Vec<_>>>()?;
        Some(s.build(children))
    }
    let mut it = steps.into_iter();
    let d = go(&mut it)?;
    it.next().is_none().then_some(d)
}
