//! Kernel values back to surface syntax using the declared notations.

use crate::kernel::{Environment, Formula, HypKind, Name, NotationKind, ProofState, Term};

use super::surface::{Binder, Expr};

fn numeral(env: &Environment, t: &Term) -> Option<u64> {
    let is_nat_ctor = |c: &Name| matches!(env.constructor(c), Some((ty, _)) if ty.name.as_str() == "nat");
    let mut n = 0u64;
    let mut cur = t;
    loop {
        match cur {
            Term::Ctor(c, args) if c.as_str() == "O" && args.is_empty() && is_nat_ctor(c) => return Some(n),
            Term::Ctor(c, args) if c.as_str() == "S" && args.len() == 1 && is_nat_ctor(c) => {
                n += 1;
                cur = &args[0];
            }
            _ => return None,
        }
    }
}

pub fn term_to_expr(env: &Environment, t: &Term) -> Expr {
    if let Some(n) = numeral(env, t) {
        return Expr::Num(n);
    }
    let is = |kind: NotationKind, h: &Name| env.notation(kind) == Some(h);
    match t {
        Term::Var(x) => Expr::Ident(x.clone()),
        Term::Ctor(h, args) | Term::App(h, args) => {
            if args.is_empty() && is(NotationKind::Nil, h) {
                return Expr::Nil;
            }
            if args.len() == 2 && is(NotationKind::Cons, h) {
                return Expr::Cons(Box::new(term_to_expr(env, &args[0])), Box::new(term_to_expr(env, &args[1])));
            }
            if args.len() == 2 && is(NotationKind::Append, h) {
                return Expr::Append(Box::new(term_to_expr(env, &args[0])), Box::new(term_to_expr(env, &args[1])));
            }
            if args.is_empty() {
                Expr::Ident(h.clone())
            } else {
                Expr::App(h.clone(), args.iter().map(|a| term_to_expr(env, a)).collect())
            }
        }
    }
}

pub fn formula_to_expr(env: &Environment, f: &Formula) -> Expr {
    match f {
        Formula::Eq { lhs, rhs, .. } => Expr::Eq(Box::new(term_to_expr(env, lhs)), Box::new(term_to_expr(env, rhs))),
        Formula::Pred(p, args) if args.is_empty() => Expr::Ident(p.clone()),
        Formula::Pred(p, args) => Expr::App(p.clone(), args.iter().map(|a| term_to_expr(env, a)).collect()),
        Formula::Imp(a, b) => Expr::Arrow(Box::new(formula_to_expr(env, a)), Box::new(formula_to_expr(env, b))),
        Formula::Forall { .. } => {
            let mut binders = Vec::new();
            let mut cur = f;
            while let Formula::Forall { var, ty, body } = cur {
                binders.push(Binder { name: var.clone(), ty: Some(ty.clone()) });
                cur = body;
            }
            Expr::Forall(binders, Box::new(formula_to_expr(env, cur)))
        }
    }
}

pub fn print_term(env: &Environment, t: &Term) -> String {
    term_to_expr(env, t).to_string()
}

pub fn print_formula(env: &Environment, f: &Formula) -> String {
    formula_to_expr(env, f).to_string()
}

/// Hypotheses as `(name, statement-or-type)` pairs and the goal.
pub fn print_state(env: &Environment, s: &ProofState) -> (Vec<(String, String)>, String) {
    let hyps = s
        .hyps
        .iter()
        .map(|h| {
            let text = match &h.kind {
                HypKind::Var(ty) => ty.to_string(),
                HypKind::Prop(p) => print_formula(env, p),
            };
            (h.name.to_string(), text)
        })
        .collect();
    (hyps, print_formula(env, &s.goal))
}
