use super::env::Environment;
use super::term::{Formula, Subst, Term};

/// Normal form under guarded unfolding: a fixpoint application reduces only
/// when its decreasing argument is headed by a constructor.
pub fn normalize(env: &Environment, t: &Term) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Ctor(c, args) => Term::Ctor(c.clone(), args.iter().map(|a| normalize(env, a)).collect()),
        Term::App(f, args) => {
            let args: Vec<Term> = args.iter().map(|a| normalize(env, a)).collect();
            if let Some(fix) = env.fixpoint(f) {
                if let Some(Term::Ctor(c, cargs)) = args.get(fix.decreasing) {
                    if let Some(branch) = fix.branch(c) {
                        let mut sigma = Subst::new();
                        for (p, a) in fix.params.iter().zip(&args) {
                            sigma.insert(p.name.clone(), a.clone());
                        }
                        for (b, a) in branch.binders.iter().zip(cargs) {
                            sigma.insert(b.clone(), a.clone());
                        }
                        return normalize(env, &branch.body.subst(&sigma));
                    }
                }
            }
            Term::App(f.clone(), args)
        }
    }
}

pub fn normalize_formula(env: &Environment, f: &Formula) -> Formula {
    f.map_terms(&mut |t| normalize(env, t))
}

/// Same normal form up to bound-variable renaming.
pub fn convertible(env: &Environment, a: &Formula, b: &Formula) -> bool {
    a == b || normalize_formula(env, a).alpha_eq(&normalize_formula(env, b))
}

pub fn terms_convertible(env: &Environment, a: &Term, b: &Term) -> bool {
    a == b || normalize(env, a) == normalize(env, b)
}
