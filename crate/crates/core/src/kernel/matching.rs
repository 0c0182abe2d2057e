//! One-sided first-order matching.

use std::collections::BTreeSet;

use super::name::Name;
use super::term::{Formula, Subst, Term};

/// Finds the unique σ over `pattern_vars` with σ(pattern) = subject.
/// Variables not in `pattern_vars` are rigid and match only themselves.
pub fn match_term(pattern: &Term, subject: &Term, pattern_vars: &BTreeSet<Name>) -> Option<Subst> {
    let mut sigma = Subst::new();
    match_term_into(pattern, subject, pattern_vars, &mut sigma, &[]).then_some(sigma)
}

pub fn match_formula(pattern: &Formula, subject: &Formula, pattern_vars: &BTreeSet<Name>) -> Option<Subst> {
    let mut sigma = Subst::new();
    match_formula_into(pattern, subject, pattern_vars, &mut sigma, &mut Vec::new()).then_some(sigma)
}

/// Extends `sigma`; on failure `sigma` may hold partial bindings.
pub fn match_term_into(
    pattern: &Term,
    subject: &Term,
    pattern_vars: &BTreeSet<Name>,
    sigma: &mut Subst,
    binders: &[(Name, Name)],
) -> bool {
    match pattern {
        Term::Var(x) => {
            // bound variables pair up positionally
            if let Some((_, r)) = binders.iter().rev().find(|(l, _)| l == x) {
                return matches!(subject, Term::Var(y) if y == r);
            }
            if pattern_vars.contains(x) {
                // a binding may not mention variables bound inside the subject
                if binders.iter().any(|(_, r)| subject.mentions(r)) {
                    return false;
                }
                match sigma.get(x) {
                    Some(bound) => bound == subject,
                    None => {
                        sigma.insert(x.clone(), subject.clone());
                        true
                    }
                }
            } else {
                match subject {
                    Term::Var(y) => y == x && !binders.iter().any(|(_, r)| r == y),
                    _ => false,
                }
            }
        }
        Term::Ctor(c, args) => match subject {
            Term::Ctor(d, sargs) if c == d && args.len() == sargs.len() => args
                .iter()
                .zip(sargs)
                .all(|(p, s)| match_term_into(p, s, pattern_vars, sigma, binders)),
            _ => false,
        },
        Term::App(f, args) => match subject {
            Term::App(g, sargs) if f == g && args.len() == sargs.len() => args
                .iter()
                .zip(sargs)
                .all(|(p, s)| match_term_into(p, s, pattern_vars, sigma, binders)),
            _ => false,
        },
    }
}

fn match_formula_into(
    pattern: &Formula,
    subject: &Formula,
    pattern_vars: &BTreeSet<Name>,
    sigma: &mut Subst,
    binders: &mut Vec<(Name, Name)>,
) -> bool {
    match (pattern, subject) {
        (Formula::Eq { lhs: l1, rhs: r1, ty: t1 }, Formula::Eq { lhs: l2, rhs: r2, ty: t2 }) => {
            // a pattern may leave the equation's type open
            (t1 == t2 || t1.as_str() == "?")
                && match_term_into(l1, l2, pattern_vars, sigma, binders)
                && match_term_into(r1, r2, pattern_vars, sigma, binders)
        }
        (Formula::Pred(p, a1), Formula::Pred(q, a2)) => {
            p == q
                && a1.len() == a2.len()
                && a1.iter().zip(a2).all(|(x, y)| match_term_into(x, y, pattern_vars, sigma, binders))
        }
        (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => {
            match_formula_into(a1, a2, pattern_vars, sigma, binders)
                && match_formula_into(b1, b2, pattern_vars, sigma, binders)
        }
        (Formula::Forall { var: v1, ty: t1, body: b1 }, Formula::Forall { var: v2, ty: t2, body: b2 }) => {
            if t1 != t2 {
                return false;
            }
            binders.push((v1.clone(), v2.clone()));
            let ok = match_formula_into(b1, b2, pattern_vars, sigma, binders);
            binders.pop();
            ok
        }
        _ => false,
    }
}
