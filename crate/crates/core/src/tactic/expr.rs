use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::kernel::{Direction, Name};
use crate::syntax::{self, Expr, ParseError};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TacticExpr {
    Intro(Option<Name>),
    Intros,
    Apply(Name),
    Rewrite(Direction, Name),
    Reflexivity,
    Symmetry,
    Assumption,
    FEqual,
    Simpl,
    Induction(Name),
    Destruct(Name),
    Auto,
    Fail,
    Exact(Name),
    Seq(Box<TacticExpr>, Box<TacticExpr>),
    Alt(Box<TacticExpr>, Box<TacticExpr>),
    Solve(Box<TacticExpr>),
    Repeat(Box<TacticExpr>),
    Call(Name),
    MatchGoal(Vec<MatchArm>),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MatchArm {
    /// Goal pattern over `_` and `?x`; resolved against the goal's context
    /// when the arm is tried.
    pub pattern: Expr,
    pub body: TacticExpr,
}

/// Words the tactic grammar reserves; they cannot name a tactic definition.
pub const KEYWORDS: &[&str] = &[
    "intro",
    "intros",
    "apply",
    "rewrite",
    "reflexivity",
    "symmetry",
    "assumption",
    "f_equal",
    "simpl",
    "induction",
    "destruct",
    "auto",
    "fail",
    "exact",
    "solve",
    "repeat",
    "match",
    "goal",
    "with",
    "end",
    "search",
    "suggest",
    "failing",
    "forall",
];

impl TacticExpr {
    pub fn seq(a: TacticExpr, b: TacticExpr) -> TacticExpr {
        TacticExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn alt(a: TacticExpr, b: TacticExpr) -> TacticExpr {
        TacticExpr::Alt(Box::new(a), Box::new(b))
    }

    /// Names of tactic definitions referenced anywhere inside, in order of
    /// first occurrence.
    pub fn calls(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_calls(&mut out);
        out
    }

    fn collect_calls(&self, out: &mut Vec<Name>) {
        match self {
            TacticExpr::Call(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            TacticExpr::Seq(a, b) | TacticExpr::Alt(a, b) => {
                a.collect_calls(out);
                b.collect_calls(out);
            }
            TacticExpr::Solve(t) | TacticExpr::Repeat(t) => t.collect_calls(out),
            TacticExpr::MatchGoal(arms) => arms.iter().for_each(|a| a.body.collect_calls(out)),
            _ => {}
        }
    }

    pub fn is_atomic(&self) -> bool {
        !matches!(
            self,
            TacticExpr::Seq(..)
                | TacticExpr::Alt(..)
                | TacticExpr::Solve(_)
                | TacticExpr::Repeat(_)
                | TacticExpr::Call(_)
                | TacticExpr::MatchGoal(_)
        )
    }

    /// Flattens a left-nested sequence into its constituents.
    pub fn seq_items(&self) -> Vec<&TacticExpr> {
        match self {
            TacticExpr::Seq(a, b) => {
                let mut items = a.seq_items();
                items.push(b);
                items
            }
            other => vec![other],
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let level = match self {
            TacticExpr::Seq(..) => 0,
            TacticExpr::Alt(..) => 1,
            _ => 2,
        };
        if level < ctx {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            TacticExpr::Intro(None) => write!(f, "intro"),
            TacticExpr::Intro(Some(x)) => write!(f, "intro {x}"),
            TacticExpr::Intros => write!(f, "intros"),
            TacticExpr::Apply(x) => write!(f, "apply {x}"),
            TacticExpr::Rewrite(Direction::Forward, x) => write!(f, "rewrite {x}"),
            TacticExpr::Rewrite(Direction::Backward, x) => write!(f, "rewrite <- {x}"),
            TacticExpr::Reflexivity => write!(f, "reflexivity"),
            TacticExpr::Symmetry => write!(f, "symmetry"),
            TacticExpr::Assumption => write!(f, "assumption"),
            TacticExpr::FEqual => write!(f, "f_equal"),
            TacticExpr::Simpl => write!(f, "simpl"),
            TacticExpr::Induction(x) => write!(f, "induction {x}"),
            TacticExpr::Destruct(x) => write!(f, "destruct {x}"),
            TacticExpr::Auto => write!(f, "auto"),
            TacticExpr::Fail => write!(f, "fail"),
            TacticExpr::Exact(x) => write!(f, "exact {x}"),
            TacticExpr::Seq(a, b) => {
                a.write_at(f, 0)?;
                write!(f, "; ")?;
                b.write_at(f, 1)
            }
            TacticExpr::Alt(a, b) => {
                a.write_at(f, 1)?;
                write!(f, " + ")?;
                b.write_at(f, 2)
            }
            TacticExpr::Solve(t) => {
                write!(f, "solve [")?;
                t.write_at(f, 0)?;
                write!(f, "]")
            }
            TacticExpr::Repeat(t) => {
                write!(f, "repeat ")?;
                t.write_at(f, 2)
            }
            TacticExpr::Call(x) => write!(f, "{x}"),
            TacticExpr::MatchGoal(arms) => {
                write!(f, "match goal with")?;
                for arm in arms {
                    write!(f, " | |- {} => ", arm.pattern)?;
                    arm.body.write_at(f, 0)?;
                }
                write!(f, " end")
            }
        }
    }
}

impl fmt::Display for TacticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl std::str::FromStr for TacticExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        syntax::parse_tactic(s)
    }
}

/// Printed form of a reconstruction cache: `search failing (t₁; …; tₙ)`.
pub fn print_cache(tactics: &[TacticExpr]) -> String {
    struct Item<'a>(&'a TacticExpr);
    impl fmt::Display for Item<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            self.0.write_at(f, 1)
        }
    }
    let items: Vec<String> = tactics.iter().map(|t| Item(t).to_string()).collect();
    format!("search failing ({})", items.join("; "))
}

/// A named tactic definition (`Ltac name := body`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TacticDef {
    pub name: Name,
    pub body: TacticExpr,
}

#[derive(Serialize, Deserialize)]
struct PrintedDef {
    name: Name,
    body: String,
}

impl Serialize for TacticDef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PrintedDef { name: self.name.clone(), body: self.body.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TacticDef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let p = PrintedDef::deserialize(d)?;
        let body = syntax::parse_tactic(&p.body).map_err(serde::de::Error::custom)?;
        Ok(TacticDef { name: p.name, body })
    }
}
