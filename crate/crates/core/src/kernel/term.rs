//! First-order terms and formulas, with capture-avoiding substitution and
//! positional access used by the rewrite rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::name::{fresh_name, Name};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(Name),
    /// Constructor application (nullary constructors have no args).
    Ctor(Name, Vec<Term>),
    /// Fixpoint application.
    App(Name, Vec<Term>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Eq { lhs: Term, rhs: Term, ty: Name },
    Pred(Name, Vec<Term>),
    Imp(Box<Formula>, Box<Formula>),
    Forall { var: Name, ty: Name, body: Box<Formula> },
}

/// Simultaneous substitution of variables by terms.
pub type Subst = BTreeMap<Name, Term>;

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::Ctor(_, args) | Term::App(_, args) => args,
        }
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Ctor(_, args) | Term::App(_, args) => {
                for a in args {
                    a.free_vars_into(out);
                }
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn mentions(&self, x: &Name) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Ctor(_, args) | Term::App(_, args) => args.iter().any(|a| a.mentions(x)),
        }
    }

    pub fn subst(&self, sigma: &Subst) -> Term {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Ctor(c, args) => Term::Ctor(c.clone(), args.iter().map(|a| a.subst(sigma)).collect()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst(sigma)).collect()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.args().get(*i)?.subterm(rest),
        }
    }

    pub fn replace(&self, path: &[usize], new: &Term) -> Option<Term> {
        let Some((i, rest)) = path.split_first() else {
            return Some(new.clone());
        };
        let (head, args, is_ctor) = match self {
            Term::Var(_) => return None,
            Term::Ctor(c, args) => (c, args, true),
            Term::App(f, args) => (f, args, false),
        };
        let mut args = args.clone();
        let slot = args.get_mut(*i)?;
        *slot = slot.replace(rest, new)?;
        Some(if is_ctor { Term::Ctor(head.clone(), args) } else { Term::App(head.clone(), args) })
    }
}

impl Formula {
    pub fn eq(lhs: Term, rhs: Term, ty: impl Into<Name>) -> Formula {
        Formula::Eq { lhs, rhs, ty: ty.into() }
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<Name>, ty: impl Into<Name>, body: Formula) -> Formula {
        Formula::Forall { var: var.into(), ty: ty.into(), body: Box::new(body) }
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Eq { lhs, rhs, .. } => {
                lhs.free_vars_into(out);
                rhs.free_vars_into(out);
            }
            Formula::Pred(_, args) => args.iter().for_each(|a| a.free_vars_into(out)),
            Formula::Imp(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Formula::Forall { var, body, .. } => {
                let mut inner = BTreeSet::new();
                body.free_vars_into(&mut inner);
                inner.remove(var);
                out.extend(inner);
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn mentions(&self, x: &Name) -> bool {
        match self {
            Formula::Eq { lhs, rhs, .. } => lhs.mentions(x) || rhs.mentions(x),
            Formula::Pred(_, args) => args.iter().any(|a| a.mentions(x)),
            Formula::Imp(a, b) => a.mentions(x) || b.mentions(x),
            Formula::Forall { var, body, .. } => var != x && body.mentions(x),
        }
    }

    /// Capture-avoiding simultaneous substitution.
    pub fn subst(&self, sigma: &Subst) -> Formula {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Formula::Eq { lhs, rhs, ty } => Formula::Eq { lhs: lhs.subst(sigma), rhs: rhs.subst(sigma), ty: ty.clone() },
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(|a| a.subst(sigma)).collect()),
            Formula::Imp(a, b) => Formula::imp(a.subst(sigma), b.subst(sigma)),
            Formula::Forall { var, ty, body } => {
                let body_fv = body.free_vars();
                let mut inner: Subst = sigma
                    .iter()
                    .filter(|(k, _)| *k != var && body_fv.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                if inner.is_empty() {
                    return self.clone();
                }
                let range_fv: BTreeSet<Name> = inner.values().flat_map(|t| t.free_vars()).collect();
                if range_fv.contains(var) {
                    let renamed = fresh_name(var.as_str(), |c| {
                        let c = Name::new(c);
                        range_fv.contains(&c) || body_fv.contains(&c) || inner.contains_key(&c)
                    });
                    inner.insert(var.clone(), Term::Var(renamed.clone()));
                    Formula::Forall { var: renamed, ty: ty.clone(), body: Box::new(body.subst(&inner)) }
                } else {
                    Formula::Forall { var: var.clone(), ty: ty.clone(), body: Box::new(body.subst(&inner)) }
                }
            }
        }
    }

    pub fn subst1(&self, x: &Name, t: Term) -> Formula {
        let mut sigma = Subst::new();
        sigma.insert(x.clone(), t);
        self.subst(&sigma)
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Eq { lhs, rhs, ty } => Formula::Eq { lhs: f(lhs), rhs: f(rhs), ty: ty.clone() },
            Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(&mut *f).collect()),
            Formula::Imp(a, b) => Formula::imp(a.map_terms(f), b.map_terms(f)),
            Formula::Forall { var, ty, body } => Formula::forall(var.clone(), ty.clone(), body.map_terms(f)),
        }
    }

    /// The term at `path`, together with the variables bound above it.
    pub fn term_at(&self, path: &[usize]) -> Option<(&Term, Vec<Name>)> {
        let mut bound = Vec::new();
        let mut f = self;
        let mut rest = path;
        loop {
            let (i, tail) = rest.split_first()?;
            match f {
                Formula::Eq { lhs, rhs, .. } => {
                    let t = match i {
                        0 => lhs,
                        1 => rhs,
                        _ => return None,
                    };
                    return t.subterm(tail).map(|t| (t, bound));
                }
                Formula::Pred(_, args) => return args.get(*i)?.subterm(tail).map(|t| (t, bound)),
                Formula::Imp(a, b) => {
                    f = match i {
                        0 => a,
                        1 => b,
                        _ => return None,
                    };
                }
                Formula::Forall { var, body, .. } => {
                    if *i != 0 {
                        return None;
                    }
                    bound.push(var.clone());
                    f = body;
                }
            }
            rest = tail;
        }
    }

    pub fn replace_at(&self, path: &[usize], new: &Term) -> Option<Formula> {
        let (i, tail) = path.split_first()?;
        Some(match self {
            Formula::Eq { lhs, rhs, ty } => match i {
                0 => Formula::Eq { lhs: lhs.replace(tail, new)?, rhs: rhs.clone(), ty: ty.clone() },
                1 => Formula::Eq { lhs: lhs.clone(), rhs: rhs.replace(tail, new)?, ty: ty.clone() },
                _ => return None,
            },
            Formula::Pred(p, args) => {
                let mut args = args.clone();
                let slot = args.get_mut(*i)?;
                *slot = slot.replace(tail, new)?;
                Formula::Pred(p.clone(), args)
            }
            Formula::Imp(a, b) => match i {
                0 => Formula::imp(a.replace_at(tail, new)?, (**b).clone()),
                1 => Formula::imp((**a).clone(), b.replace_at(tail, new)?),
                _ => return None,
            },
            Formula::Forall { var, ty, body } if *i == 0 => {
                Formula::forall(var.clone(), ty.clone(), body.replace_at(tail, new)?)
            }
            Formula::Forall { .. } => return None,
        })
    }

    /// Every term position in leftmost-outermost (pre-order) order, with
    /// the binders in scope at that position.
    pub fn term_positions(&self) -> Vec<(Vec<usize>, &Term, Vec<Name>)> {
        fn walk_term<'a>(t: &'a Term, path: &mut Vec<usize>, bound: &[Name], out: &mut Vec<(Vec<usize>, &'a Term, Vec<Name>)>) {
            out.push((path.clone(), t, bound.to_vec()));
            for (i, a) in t.args().iter().enumerate() {
                path.push(i);
                walk_term(a, path, bound, out);
                path.pop();
            }
        }
        fn walk<'a>(f: &'a Formula, path: &mut Vec<usize>, bound: &mut Vec<Name>, out: &mut Vec<(Vec<usize>, &'a Term, Vec<Name>)>) {
            match f {
                Formula::Eq { lhs, rhs, .. } => {
                    for (i, t) in [lhs, rhs].into_iter().enumerate() {
                        path.push(i);
                        walk_term(t, path, bound, out);
                        path.pop();
                    }
                }
                Formula::Pred(_, args) => {
                    for (i, t) in args.iter().enumerate() {
                        path.push(i);
                        walk_term(t, path, bound, out);
                        path.pop();
                    }
                }
                Formula::Imp(a, b) => {
                    for (i, g) in [a, b].into_iter().enumerate() {
                        path.push(i);
                        walk(g, path, bound, out);
                        path.pop();
                    }
                }
                Formula::Forall { var, body, .. } => {
                    path.push(0);
                    bound.push(var.clone());
                    walk(body, path, bound, out);
                    bound.pop();
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut Vec::new(), &mut out);
        out
    }

    /// Structural equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha_eq_in(self, other, &mut Vec::new())
    }
}

fn alpha_eq_in(a: &Formula, b: &Formula, binders: &mut Vec<(Name, Name)>) -> bool {
    match (a, b) {
        (Formula::Eq { lhs: l1, rhs: r1, ty: t1 }, Formula::Eq { lhs: l2, rhs: r2, ty: t2 }) => {
            t1 == t2 && term_alpha_eq(l1, l2, binders) && term_alpha_eq(r1, r2, binders)
        }
        (Formula::Pred(p1, a1), Formula::Pred(p2, a2)) => {
            p1 == p2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| term_alpha_eq(x, y, binders))
        }
        (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => alpha_eq_in(a1, a2, binders) && alpha_eq_in(b1, b2, binders),
        (Formula::Forall { var: v1, ty: t1, body: b1 }, Formula::Forall { var: v2, ty: t2, body: b2 }) => {
            if t1 != t2 {
                return false;
            }
            binders.push((v1.clone(), v2.clone()));
            let ok = alpha_eq_in(b1, b2, binders);
            binders.pop();
            ok
        }
        _ => false,
    }
}

fn term_alpha_eq(a: &Term, b: &Term, binders: &[(Name, Name)]) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            for (l, r) in binders.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Term::Ctor(c1, a1), Term::Ctor(c2, a2)) | (Term::App(c1, a1), Term::App(c2, a2)) => {
            c1 == c2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| term_alpha_eq(x, y, binders))
        }
        _ => false,
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Ctor(h, args) | Term::App(h, args) => {
                if args.is_empty() {
                    return write!(f, "{h}");
                }
                write!(f, "{h}")?;
                for a in args {
                    if a.args().is_empty() {
                        write!(f, " {a}")?;
                    } else {
                        write!(f, " ({a})")?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Eq { lhs, rhs, .. } => write!(f, "{lhs} = {rhs}"),
            Formula::Pred(p, args) => write!(f, "{}", Term::App(p.clone(), args.clone())),
            Formula::Imp(a, b) => match **a {
                Formula::Imp(..) | Formula::Forall { .. } => write!(f, "({a}) -> {b}"),
                _ => write!(f, "{a} -> {b}"),
            },
            Formula::Forall { var, ty, body } => write!(f, "forall ({var} : {ty}), {body}"),
        }
    }
}
