use std::collections::BTreeMap;

use crate::kernel::Name;
use crate::tactic::{MatchArm, TacticExpr};

use super::features::{cosine, tree_features, FeatureBag};
use super::sentence::{encode_tactic, ProofStateView, Sentence};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LearnerError {
    #[error("mapping misses local variable `{0}`")]
    IncompleteMapping(Name),
    #[error("a learner named `{0}` is already registered")]
    DuplicateLearner(String),
    #[error("no learner named `{0}`")]
    UnknownLearner(String),
}

/// A recorded tactic as learners see it. Local variables are the
/// references into the context of the state it was recorded in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TacticView {
    tactic: TacticExpr,
    printed: String,
    locals: Vec<Name>,
    /// What each local looked like where it was recorded.
    profiles: Vec<FeatureBag>,
}

fn references(t: &TacticExpr, out: &mut Vec<Name>) {
    use TacticExpr as T;
    match t {
        T::Apply(x) | T::Exact(x) | T::Rewrite(_, x) | T::Induction(x) | T::Destruct(x) => {
            if !out.contains(x) {
                out.push(x.clone());
            }
        }
        T::Seq(a, b) | T::Alt(a, b) => {
            references(a, out);
            references(b, out);
        }
        T::Solve(a) | T::Repeat(a) => references(a, out),
        T::MatchGoal(arms) => arms.iter().for_each(|a| references(&a.body, out)),
        _ => {}
    }
}

fn rename(t: &TacticExpr, map: &BTreeMap<Name, Name>) -> TacticExpr {
    use TacticExpr as T;
    let r = |x: &Name| map.get(x).cloned().unwrap_or_else(|| x.clone());
    match t {
        T::Apply(x) => T::Apply(r(x)),
        T::Exact(x) => T::Exact(r(x)),
        T::Rewrite(d, x) => T::Rewrite(*d, r(x)),
        T::Induction(x) => T::Induction(r(x)),
        T::Destruct(x) => T::Destruct(r(x)),
        T::Seq(a, b) => T::seq(rename(a, map), rename(b, map)),
        T::Alt(a, b) => T::alt(rename(a, map), rename(b, map)),
        T::Solve(a) => T::Solve(Box::new(rename(a, map))),
        T::Repeat(a) => T::Repeat(Box::new(rename(a, map))),
        T::MatchGoal(arms) => {
            T::MatchGoal(arms.iter().map(|a| MatchArm { pattern: a.pattern.clone(), body: rename(&a.body, map) }).collect())
        }
        other => other.clone(),
    }
}

/// Statement features of hypothesis `x` plus where `x` occurs.
pub fn profile(view: &ProofStateView, x: &Name) -> FeatureBag {
    let mut bag = FeatureBag::new();
    if let Some((_, s)) = view.hyps.iter().find(|(h, _)| h == x) {
        tree_features("H:", s, &mut bag);
    }
    let label = format!("var:{x}");
    let mut occurs = |s: &Sentence| {
        s.visit(&mut |n| {
            for (i, c) in n.children.iter().enumerate() {
                if c.label == label && c.children.is_empty() {
                    let parent = if n.label.starts_with("var:") { "var:⋆" } else { &n.label };
                    *bag.entry(format!("O:{parent}#{i}")).or_default() += 1;
                }
            }
        })
    };
    occurs(&view.goal);
    for (_, s) in &view.hyps {
        occurs(s);
    }
    bag
}

impl TacticView {
    pub fn new(tactic: TacticExpr, before: &ProofStateView) -> TacticView {
        let mut refs = Vec::new();
        references(&tactic, &mut refs);
        let locals: Vec<Name> = refs.into_iter().filter(|x| before.has(x)).collect();
        let profiles = locals.iter().map(|x| profile(before, x)).collect();
        let printed = tactic.to_string();
        TacticView { tactic, printed, locals, profiles }
    }

    pub fn tactic(&self) -> &TacticExpr {
        &self.tactic
    }

    pub fn printed(&self) -> &str {
        &self.printed
    }

    pub fn local_variables(&self) -> &[Name] {
        &self.locals
    }

    pub fn sentence(&self) -> Sentence {
        encode_tactic(&self.tactic, &|x| self.locals.contains(x))
    }

    /// Printed form with locals replaced by `_L0`, `_L1`, … in order.
    pub fn key(&self) -> String {
        if self.locals.is_empty() {
            return self.printed.clone();
        }
        let map = self.locals.iter().enumerate().map(|(i, x)| (x.clone(), Name::new(format!("_L{i}")))).collect();
        rename(&self.tactic, &map).to_string()
    }

    /// Simultaneous renaming of the local references.
    pub fn substitute(&self, mapping: &BTreeMap<Name, Name>) -> Result<TacticView, LearnerError> {
        if let Some(x) = self.locals.iter().find(|x| !mapping.contains_key(*x)) {
            return Err(LearnerError::IncompleteMapping(x.clone()));
        }
        let map: BTreeMap<Name, Name> =
            self.locals.iter().map(|x| (x.clone(), mapping[x].clone())).collect();
        let tactic = rename(&self.tactic, &map);
        Ok(TacticView {
            printed: tactic.to_string(),
            tactic,
            locals: self.locals.iter().map(|x| map[x].clone()).collect(),
            profiles: self.profiles.clone(),
        })
    }
}

/// Points each local missing from `state` at its most similar hypothesis.
/// A hypothesis sharing no feature with the original is never chosen.
pub fn remap_locals(state: &ProofStateView, t: &TacticView) -> Option<TacticView> {
    let mut mapping = BTreeMap::new();
    for (x, want) in t.locals.iter().zip(&t.profiles) {
        if state.has(x) {
            mapping.insert(x.clone(), x.clone());
            continue;
        }
        let mut best: Option<(f64, &Name)> = None;
        for (h, _) in &state.hyps {
            let sim = cosine(want, &profile(state, h));
            if sim > 0.0 && best.is_none_or(|(b, _)| sim >= b) {
                best = Some((sim, h));
            }
        }
        mapping.insert(x.clone(), best?.1.clone());
    }
    t.substitute(&mapping).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(hyps: &[(&str, Sentence)]) -> ProofStateView {
        ProofStateView {
            hyps: hyps.iter().map(|(n, s)| (Name::new(*n), s.clone())).collect(),
            goal: Sentence::leaf("goal"),
        }
    }

    fn ih() -> Sentence {
        Sentence::node("eq", vec![Sentence::leaf("var:ls"), Sentence::leaf("var:ls")])
    }

    #[test]
    fn locals_are_context_references() {
        let s = state(&[("IHls", ih())]);
        let t = TacticView::new("apply IHls".parse().unwrap(), &s);
        assert_eq!(t.local_variables(), &[Name::new("IHls")]);
        assert_eq!(t.sentence(), Sentence::node("apply", vec![Sentence::leaf("var:IHls")]));
        let g = TacticView::new("rewrite concat_nil_r".parse().unwrap(), &s);
        assert!(g.local_variables().is_empty());
        assert_eq!(g.key(), "rewrite concat_nil_r");
        assert_eq!(t.key(), "apply _L0");
    }

    #[test]
    fn substitution() {
        let s = state(&[("IHls", ih())]);
        let t = TacticView::new("apply IHls".parse().unwrap(), &s);
        let m = BTreeMap::from([(Name::new("IHls"), Name::new("IHls'"))]);
        assert_eq!(t.substitute(&m).unwrap().printed(), "apply IHls'");
        assert!(matches!(t.substitute(&BTreeMap::new()), Err(LearnerError::IncompleteMapping(_))));
        let id = BTreeMap::from([(Name::new("IHls"), Name::new("IHls"))]);
        assert_eq!(t.substitute(&id).unwrap(), t);
    }

    #[test]
    fn remap_picks_the_similar_hypothesis() {
        let s = state(&[("IHls", ih())]);
        let t = TacticView::new("apply IHls".parse().unwrap(), &s);
        assert_eq!(remap_locals(&s, &t).unwrap().printed(), "apply IHls");
        let other = state(&[("n", Sentence::leaf("type:nat")), ("IHls0", ih())]);
        assert_eq!(remap_locals(&other, &t).unwrap().printed(), "apply IHls0");
        assert!(remap_locals(&state(&[]), &t).is_none());
        let plain = TacticView::new("assumption".parse().unwrap(), &s);
        assert_eq!(remap_locals(&state(&[]), &plain).unwrap(), plain);
    }
}
