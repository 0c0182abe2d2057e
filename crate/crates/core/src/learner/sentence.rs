//! The uniform tree encoding every piece of syntax is fed to learners in.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::kernel::{Formula, HypKind, Name, ProofState, Term};
use crate::tactic::TacticExpr;

/// Label of the goal of the distinguished solved state.
pub const SOLVED: &str = "⊤";

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Sentence {
    pub label: String,
    pub children: Vec<Sentence>,
}

impl Sentence {
    pub fn node(label: impl Into<String>, children: Vec<Sentence>) -> Sentence {
        Sentence { label: label.into(), children }
    }

    pub fn leaf(label: impl Into<String>) -> Sentence {
        Sentence::node(label, Vec::new())
    }

    pub fn var(name: &Name) -> Sentence {
        Sentence::leaf(format!("var:{name}"))
    }

    /// Pre-order walk.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Sentence)) {
        f(self);
        for c in &self.children {
            c.visit(f);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Sentence::size).sum::<usize>()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

// `[label, [child, …]]`
impl Serialize for Sentence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.label)?;
        t.serialize_element(&self.children)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Sentence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Sentence;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a [label, children] pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Sentence, A::Error> {
                let label: String = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let children = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if label.is_empty() {
                    return Err(de::Error::custom("empty sentence label"));
                }
                Ok(Sentence { label, children })
            }
        }
        d.deserialize_tuple(2, V)
    }
}

pub fn encode_term(t: &Term) -> Sentence {
    match t {
        Term::Var(x) => Sentence::var(x),
        Term::Ctor(h, args) | Term::App(h, args) => Sentence::node(h.as_str(), args.iter().map(encode_term).collect()),
    }
}

pub fn encode_formula(f: &Formula) -> Sentence {
    match f {
        Formula::Eq { lhs, rhs, .. } => Sentence::node("eq", vec![encode_term(lhs), encode_term(rhs)]),
        Formula::Pred(p, args) => Sentence::node(p.as_str(), args.iter().map(encode_term).collect()),
        Formula::Imp(a, b) => Sentence::node("implies", vec![encode_formula(a), encode_formula(b)]),
        Formula::Forall { var, ty, body } => {
            Sentence::node("forall", vec![Sentence::var(var), Sentence::leaf(format!("type:{ty}")), encode_formula(body)])
        }
    }
}

/// A proof state as learners see it.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ProofStateView {
    pub hyps: Vec<(Name, Sentence)>,
    pub goal: Sentence,
}

impl ProofStateView {
    /// Stands in for "no goals left" where a single state is expected.
    pub fn solved() -> ProofStateView {
        ProofStateView { hyps: Vec::new(), goal: Sentence::leaf(SOLVED) }
    }

    pub fn has(&self, id: &Name) -> bool {
        self.hyps.iter().any(|(h, _)| h == id)
    }
}

pub fn encode_state(state: &ProofState) -> ProofStateView {
    let hyps = state
        .hyps
        .iter()
        .map(|h| {
            let s = match &h.kind {
                HypKind::Var(ty) => Sentence::leaf(format!("type:{ty}")),
                HypKind::Prop(p) => encode_formula(p),
            };
            (h.name.clone(), s)
        })
        .collect();
    ProofStateView { hyps, goal: encode_formula(&state.goal) }
}

fn reference(head: &str, x: &Name, locals: &dyn Fn(&Name) -> bool) -> Sentence {
    let arg = if locals(x) { Sentence::var(x) } else { Sentence::leaf(x.as_str()) };
    Sentence::node(head, vec![arg])
}

/// Encodes a tactic; references satisfying `locals` become `var:` leaves.
pub fn encode_tactic(t: &TacticExpr, locals: &dyn Fn(&Name) -> bool) -> Sentence {
    use TacticExpr as T;
    match t {
        T::Intro(None) => Sentence::leaf("intro"),
        T::Intro(Some(x)) => Sentence::node("intro", vec![Sentence::leaf(x.as_str())]),
        T::Intros => Sentence::leaf("intros"),
        T::Apply(x) => reference("apply", x, locals),
        T::Exact(x) => reference("exact", x, locals),
        T::Rewrite(dir, x) => {
            let head = match dir {
                crate::kernel::Direction::Forward => "rewrite",
                crate::kernel::Direction::Backward => "rewrite<-",
            };
            reference(head, x, locals)
        }
        T::Induction(x) => reference("induction", x, locals),
        T::Destruct(x) => reference("destruct", x, locals),
        T::Reflexivity => Sentence::leaf("reflexivity"),
        T::Symmetry => Sentence::leaf("symmetry"),
        T::Assumption => Sentence::leaf("assumption"),
        T::FEqual => Sentence::leaf("f_equal"),
        T::Simpl => Sentence::leaf("simpl"),
        T::Auto => Sentence::leaf("auto"),
        T::Fail => Sentence::leaf("fail"),
        T::Seq(a, b) => Sentence::node("seq", vec![encode_tactic(a, locals), encode_tactic(b, locals)]),
        T::Alt(a, b) => Sentence::node("alt", vec![encode_tactic(a, locals), encode_tactic(b, locals)]),
        T::Solve(a) => Sentence::node("solve", vec![encode_tactic(a, locals)]),
        T::Repeat(a) => Sentence::node("repeat", vec![encode_tactic(a, locals)]),
        T::Call(x) => Sentence::node("call", vec![Sentence::leaf(x.as_str())]),
        T::MatchGoal(arms) => Sentence::node(
            "match_goal",
            arms.iter()
                .map(|a| Sentence::node("arm", vec![Sentence::leaf(a.pattern.to_string()), encode_tactic(&a.body, locals)]))
                .collect(),
        ),
    }
}
