//! Name resolution and type inference from surface expressions to kernel
//! terms, formulas and declarations.

use std::collections::{BTreeMap, BTreeSet};

use crate::kernel::{
    Branch, Constructor, Environment, Formula, Head, InductivePredicate, InductiveType, Name, Notation, NotationKind,
    Param, PredicateRule, Term,
};

use super::command::{FixpointSrc, InductiveSrc, NotationSrc, PredicateSrc};
use super::lexer::{lex, Tok};
use super::surface::{Binder, Expr};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ElabError(pub String);

type Result<T> = std::result::Result<T, ElabError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ElabError(msg.into()))
}

/// Placeholder type name for an Eq whose type a pattern leaves open.
pub const ANY_TYPE: &str = "?";

const TY_PREFIX: &str = "?τ";

struct SelfFix {
    name: Name,
    params: Vec<usize>,
    ret: usize,
}

struct Elab<'e> {
    env: &'e Environment,
    /// A notation being declared together with its function.
    extra: Option<(NotationKind, Name)>,
    self_fix: Option<SelfFix>,
    parent: Vec<usize>,
    ty: Vec<Option<Name>>,
    pattern: bool,
    pattern_vars: BTreeMap<Name, usize>,
    wilds: usize,
}

type Scope = Vec<(Name, usize)>;

impl<'e> Elab<'e> {
    fn new(env: &'e Environment) -> Self {
        Elab {
            env,
            extra: None,
            self_fix: None,
            parent: Vec::new(),
            ty: Vec::new(),
            pattern: false,
            pattern_vars: BTreeMap::new(),
            wilds: 0,
        }
    }

    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.ty.push(None);
        self.parent.len() - 1
    }

    fn known(&mut self, ty: &Name) -> Result<usize> {
        if !self.env.is_type(ty) {
            return err(format!("unknown type `{ty}`"));
        }
        let v = self.fresh();
        self.ty[v] = Some(ty.clone());
        Ok(v)
    }

    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut cur = v;
        while self.parent[cur] != r {
            let next = self.parent[cur];
            self.parent[cur] = r;
            cur = next;
        }
        r
    }

    fn unify(&mut self, a: usize, b: usize, what: &dyn Fn() -> String) -> Result<()> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        match (self.ty[ra].clone(), self.ty[rb].clone()) {
            (Some(x), Some(y)) if x != y => err(format!("type mismatch in {}: `{x}` vs `{y}`", what())),
            (Some(_), _) => {
                self.parent[rb] = ra;
                Ok(())
            }
            _ => {
                self.parent[ra] = rb;
                Ok(())
            }
        }
    }

    fn unify_name(&mut self, a: usize, ty: &Name, what: &dyn Fn() -> String) -> Result<()> {
        let b = self.known(ty)?;
        self.unify(a, b, what)
    }

    fn resolved(&mut self, v: usize) -> Option<Name> {
        let r = self.find(v);
        self.ty[r].clone()
    }

    fn placeholder(v: usize) -> Name {
        Name::new(format!("{TY_PREFIX}{v}"))
    }

    fn notation_target(&self, kind: NotationKind) -> Result<Name> {
        if let Some((k, target)) = &self.extra {
            if *k == kind {
                return Ok(target.clone());
            }
        }
        self.env.notation(kind).cloned().ok_or_else(|| {
            ElabError(format!(
                "notation `{}` is not declared",
                match kind {
                    NotationKind::Nil => "[]",
                    NotationKind::Cons => "::",
                    NotationKind::Append => "++",
                }
            ))
        })
    }

    /// Builds `head(args)` with the head's signature.
    fn apply_head(&mut self, head: &Name, args: Vec<(Term, usize)>) -> Result<(Term, usize)> {
        if let Some(sf) = &self.self_fix {
            if &sf.name == head {
                let params = sf.params.clone();
                let ret = sf.ret;
                if params.len() != args.len() {
                    return err(format!("`{head}` expects {} argument(s), found {}", params.len(), args.len()));
                }
                let mut terms = Vec::new();
                for (i, ((t, v), p)) in args.into_iter().zip(params).enumerate() {
                    self.unify(v, p, &|| format!("argument {} of `{head}`", i + 1))?;
                    terms.push(t);
                }
                return Ok((Term::App(head.clone(), terms), ret));
            }
        }
        let is_ctor = match self.env.head(head) {
            Some(Head::Ctor { .. }) => true,
            Some(Head::Fix(_)) => false,
            None => return err(format!("unknown function or constructor `{head}`")),
        };
        let (params, ret) = self.env.signature(head).expect("resolved head");
        if params.len() != args.len() {
            return err(format!("`{head}` expects {} argument(s), found {}", params.len(), args.len()));
        }
        let mut terms = Vec::new();
        for (i, ((t, v), p)) in args.into_iter().zip(&params).enumerate() {
            self.unify_name(v, p, &|| format!("argument {} of `{head}`", i + 1))?;
            terms.push(t);
        }
        let rv = self.known(&ret)?;
        Ok((if is_ctor { Term::Ctor(head.clone(), terms) } else { Term::App(head.clone(), terms) }, rv))
    }

    fn term(&mut self, e: &Expr, scope: &Scope) -> Result<(Term, usize)> {
        match e {
            Expr::Ident(x) => {
                if let Some((_, v)) = scope.iter().rev().find(|(n, _)| n == x) {
                    return Ok((Term::Var(x.clone()), *v));
                }
                if self.env.constructor(x).is_some() {
                    return self.apply_head(x, Vec::new());
                }
                err(format!("unknown identifier `{x}`"))
            }
            Expr::Num(n) => {
                let zero = Name::new("O");
                let succ = Name::new("S");
                let nat_ok = matches!(self.env.constructor(&zero), Some((ty, _)) if ty.name.as_str() == "nat")
                    && matches!(self.env.constructor(&succ), Some((ty, _)) if ty.name.as_str() == "nat");
                if !nat_ok {
                    return err("numerals need `nat` with constructors `O` and `S`");
                }
                let mut t = Term::Ctor(zero, Vec::new());
                for _ in 0..*n {
                    t = Term::Ctor(succ.clone(), vec![t]);
                }
                let v = self.known(&Name::new("nat"))?;
                Ok((t, v))
            }
            Expr::Nil => {
                let target = self.notation_target(NotationKind::Nil)?;
                self.apply_head(&target, Vec::new())
            }
            Expr::Cons(a, b) | Expr::Append(a, b) => {
                let kind = if matches!(e, Expr::Cons(..)) { NotationKind::Cons } else { NotationKind::Append };
                let target = self.notation_target(kind)?;
                let a = self.term(a, scope)?;
                let b = self.term(b, scope)?;
                self.apply_head(&target, vec![a, b])
            }
            Expr::App(h, args) => {
                if scope.iter().any(|(n, _)| n == h) {
                    return err(format!("`{h}` is a variable and cannot be applied"));
                }
                let args = args.iter().map(|a| self.term(a, scope)).collect::<Result<Vec<_>>>()?;
                self.apply_head(h, args)
            }
            Expr::Wild if self.pattern => {
                let name = Name::new(format!("?_{}", self.wilds));
                self.wilds += 1;
                let v = self.fresh();
                self.pattern_vars.insert(name.clone(), v);
                Ok((Term::Var(name), v))
            }
            Expr::PatVar(x) if self.pattern => {
                let name = Name::new(format!("?{x}"));
                let v = match self.pattern_vars.get(&name) {
                    Some(v) => *v,
                    None => {
                        let v = self.fresh();
                        self.pattern_vars.insert(name.clone(), v);
                        v
                    }
                };
                Ok((Term::Var(name), v))
            }
            Expr::Wild | Expr::PatVar(_) => err("patterns are only allowed in `match goal`"),
            Expr::Eq(..) | Expr::Arrow(..) | Expr::Forall(..) => err(format!("expected a term, found proposition `{e}`")),
        }
    }

    fn formula(&mut self, e: &Expr, scope: &mut Scope) -> Result<Formula> {
        match e {
            Expr::Eq(a, b) => {
                let (l, lv) = self.term(a, scope)?;
                let (r, rv) = self.term(b, scope)?;
                self.unify(lv, rv, &|| format!("`{e}`"))?;
                Ok(Formula::Eq { lhs: l, rhs: r, ty: Self::placeholder(lv) })
            }
            Expr::Arrow(a, b) => {
                let a = self.formula(a, scope)?;
                let b = self.formula(b, scope)?;
                Ok(Formula::imp(a, b))
            }
            Expr::Forall(binders, body) => {
                let mut vars = Vec::new();
                for b in binders {
                    let v = match &b.ty {
                        Some(ty) => self.known(ty)?,
                        None => self.fresh(),
                    };
                    scope.push((b.name.clone(), v));
                    vars.push((b.name.clone(), v));
                }
                let body = self.formula(body, scope);
                scope.truncate(scope.len() - binders.len());
                let mut f = body?;
                for (name, v) in vars.into_iter().rev() {
                    f = Formula::Forall { var: name, ty: Self::placeholder(v), body: Box::new(f) };
                }
                Ok(f)
            }
            Expr::App(p, args) if self.env.predicate(p).is_some() => {
                let arg_types = self.env.predicate(p).expect("checked").arg_types.clone();
                if arg_types.len() != args.len() {
                    return err(format!("`{p}` expects {} argument(s), found {}", arg_types.len(), args.len()));
                }
                let mut terms = Vec::new();
                for (i, (a, ty)) in args.iter().zip(&arg_types).enumerate() {
                    let (t, v) = self.term(a, scope)?;
                    self.unify_name(v, ty, &|| format!("argument {} of `{p}`", i + 1))?;
                    terms.push(t);
                }
                Ok(Formula::Pred(p.clone(), terms))
            }
            Expr::Ident(p) if self.env.predicate(p).is_some() => {
                if !self.env.predicate(p).expect("checked").arg_types.is_empty() {
                    return err(format!("`{p}` needs arguments"));
                }
                Ok(Formula::Pred(p.clone(), Vec::new()))
            }
            _ => err(format!("expected a proposition, found `{e}`")),
        }
    }

    fn resolve_name(&mut self, n: &Name) -> Result<Name> {
        match n.as_str().strip_prefix(TY_PREFIX) {
            None => Ok(n.clone()),
            Some(idx) => {
                let v: usize = idx.parse().expect("placeholder index");
                match self.resolved(v) {
                    Some(t) => Ok(t),
                    None if self.pattern => Ok(Name::new(ANY_TYPE)),
                    None => err("cannot infer a type; add a binder annotation"),
                }
            }
        }
    }

    fn resolve(&mut self, f: Formula) -> Result<Formula> {
        Ok(match f {
            Formula::Eq { lhs, rhs, ty } => Formula::Eq { lhs, rhs, ty: self.resolve_name(&ty)? },
            Formula::Pred(..) => f,
            Formula::Imp(a, b) => Formula::imp(self.resolve(*a)?, self.resolve(*b)?),
            Formula::Forall { var, ty, body } => {
                let ty = self.resolve_name(&ty).map_err(|_| ElabError(format!("cannot infer the type of `{var}`")))?;
                Formula::Forall { var, ty, body: Box::new(self.resolve(*body)?) }
            }
        })
    }
}

/// Elaborates a proposition whose free variables are `scope`.
pub fn elab_formula(env: &Environment, scope: &[(Name, Name)], e: &Expr) -> Result<Formula> {
    let mut el = Elab::new(env);
    let mut sc = Vec::new();
    for (n, ty) in scope {
        let v = el.known(ty)?;
        sc.push((n.clone(), v));
    }
    let f = el.formula(e, &mut sc)?;
    el.resolve(f)
}

/// Elaborates a closed statement `∀ binders, e`.
pub fn elab_statement(env: &Environment, binders: &[Binder], e: &Expr) -> Result<Formula> {
    if binders.is_empty() {
        elab_formula(env, &[], e)
    } else {
        elab_formula(env, &[], &Expr::Forall(binders.to_vec(), Box::new(e.clone())))
    }
}

pub fn elab_term(env: &Environment, scope: &[(Name, Name)], e: &Expr) -> Result<(Term, Name)> {
    let mut el = Elab::new(env);
    let mut sc = Vec::new();
    for (n, ty) in scope {
        let v = el.known(ty)?;
        sc.push((n.clone(), v));
    }
    let (t, v) = el.term(e, &sc)?;
    let ty = el.resolved(v).ok_or_else(|| ElabError(format!("cannot infer the type of `{e}`")))?;
    Ok((t, ty))
}

/// A `match goal` pattern. `None` matches every goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalPattern {
    pub formula: Option<Formula>,
    pub vars: BTreeSet<Name>,
}

pub fn elab_goal_pattern(env: &Environment, scope: &[(Name, Name)], e: &Expr) -> Result<GoalPattern> {
    if matches!(e, Expr::Wild) {
        return Ok(GoalPattern { formula: None, vars: BTreeSet::new() });
    }
    let mut el = Elab::new(env);
    el.pattern = true;
    let mut sc = Vec::new();
    for (n, ty) in scope {
        let v = el.known(ty)?;
        sc.push((n.clone(), v));
    }
    let f = el.formula(e, &mut sc)?;
    let f = el.resolve(f)?;
    Ok(GoalPattern { formula: Some(f), vars: el.pattern_vars.keys().cloned().collect() })
}

fn arrow_chain(e: &Expr) -> Result<Vec<Name>> {
    match e {
        Expr::Ident(x) => Ok(vec![x.clone()]),
        Expr::Arrow(a, b) => match &**a {
            Expr::Ident(x) => {
                let mut rest = arrow_chain(b)?;
                rest.insert(0, x.clone());
                Ok(rest)
            }
            other => err(format!("expected a type name, found `{other}`")),
        },
        other => err(format!("expected a type, found `{other}`")),
    }
}

pub fn elab_inductive(src: &InductiveSrc) -> Result<InductiveType> {
    let mut ctors = Vec::new();
    for (name, ty) in &src.ctors {
        let mut chain = arrow_chain(ty)?;
        let result = chain.pop().expect("nonempty chain");
        if result != src.name {
            return err(format!("constructor `{name}` must build `{}`, not `{result}`", src.name));
        }
        ctors.push(Constructor { name: name.clone(), args: chain });
    }
    Ok(InductiveType { name: src.name.clone(), ctors })
}

pub fn elab_predicate(env: &Environment, src: &PredicateSrc) -> Result<InductivePredicate> {
    let mut chain = arrow_chain(&src.sig)?;
    if chain.pop().map(|n| n.as_str() == "Prop") != Some(true) {
        return err(format!("`{}` must be declared with a signature ending in `Prop`", src.name));
    }
    let header = InductivePredicate { name: src.name.clone(), arg_types: chain.clone(), rules: Vec::new() };
    let with_self = env
        .declare(crate::kernel::Declaration::Predicate(header))
        .map_err(|e| ElabError(e.to_string()))?;
    let mut rules = Vec::new();
    for r in &src.rules {
        let statement = elab_statement(&with_self, &r.binders, &r.statement)?;
        rules.push(PredicateRule { name: r.name.clone(), statement });
    }
    Ok(InductivePredicate { name: src.name.clone(), arg_types: chain, rules })
}

fn notation_kind(pattern: &str) -> Result<(NotationKind, Vec<Name>)> {
    let toks: Vec<Tok> = lex(pattern).map_err(|e| ElabError(e.to_string()))?.into_iter().map(|t| t.tok).collect();
    match toks.as_slice() {
        [Tok::Sym("["), Tok::Sym("]")] => Ok((NotationKind::Nil, Vec::new())),
        [Tok::Ident(a), Tok::Sym(op), Tok::Ident(b)] if *op == "::" || *op == "++" => {
            let kind = if *op == "::" { NotationKind::Cons } else { NotationKind::Append };
            Ok((kind, vec![Name::new(a), Name::new(b)]))
        }
        _ => err(format!("unsupported notation \"{pattern}\"; only `[]`, `x :: l` and `l ++ m` are available")),
    }
}

pub fn elab_notation(src: &NotationSrc) -> Result<Notation> {
    let (kind, vars) = notation_kind(&src.pattern)?;
    let target = match (&src.body, vars.as_slice()) {
        (Expr::Ident(t), []) => t.clone(),
        (Expr::App(t, args), vars)
            if args.len() == vars.len() && args.iter().zip(vars).all(|(a, v)| matches!(a, Expr::Ident(x) if x == v)) =>
        {
            t.clone()
        }
        _ => return err(format!("notation body must apply a name to {:?} in order", vars)),
    };
    Ok(Notation { kind, target })
}

fn branch_pattern(el: &Elab<'_>, e: &Expr) -> Result<(Name, Vec<Name>)> {
    let vars = |args: &[Expr]| -> Result<Vec<Name>> {
        args.iter()
            .map(|a| match a {
                Expr::Ident(x) if el.env.constructor(x).is_none() => Ok(x.clone()),
                other => err(format!("nested pattern `{other}` is not supported")),
            })
            .collect()
    };
    match e {
        Expr::Ident(c) => Ok((c.clone(), Vec::new())),
        Expr::Num(0) => Ok((Name::new("O"), Vec::new())),
        Expr::App(c, args) => Ok((c.clone(), vars(args)?)),
        Expr::Nil => Ok((el.notation_target(NotationKind::Nil)?, Vec::new())),
        Expr::Cons(a, b) => {
            Ok((el.notation_target(NotationKind::Cons)?, vars(&[(**a).clone(), (**b).clone()])?))
        }
        other => err(format!("unsupported match pattern `{other}`")),
    }
}

/// Elaborates a fixpoint and the notation introduced by its `where` clause.
pub fn elab_fixpoint(env: &Environment, src: &FixpointSrc) -> Result<(crate::kernel::FixpointFn, Option<Notation>)> {
    let notation = src.notation.as_ref().map(elab_notation).transpose()?;
    let mut el = Elab::new(env);
    if let Some(n) = &notation {
        el.extra = Some((n.kind, n.target.clone()));
    }
    let mut scope = Vec::new();
    let mut params = Vec::new();
    for p in &src.params {
        let v = match &p.ty {
            Some(t) => el.known(t)?,
            None => el.fresh(),
        };
        scope.push((p.name.clone(), v));
        params.push(v);
    }
    let ret = match &src.ret {
        Some(t) => el.known(t)?,
        None => el.fresh(),
    };
    el.self_fix = Some(SelfFix { name: src.name.clone(), params: params.clone(), ret });
    let decreasing = src
        .params
        .iter()
        .position(|p| p.name == src.scrutinee)
        .ok_or_else(|| ElabError(format!("`{}` is not a parameter of `{}`", src.scrutinee, src.name)))?;
    let mut branches = Vec::new();
    for (pat, body) in &src.branches {
        let (ctor, binders) = branch_pattern(&el, pat)?;
        let (ty, index) = env
            .constructor(&ctor)
            .ok_or_else(|| ElabError(format!("unknown constructor `{ctor}` in match")))?;
        let ty = ty.clone();
        let arg_types = ty.ctors[index].args.clone();
        if arg_types.len() != binders.len() {
            return err(format!("`{ctor}` expects {} argument(s) in pattern", arg_types.len()));
        }
        el.unify_name(params[decreasing], &ty.name, &|| format!("match on `{}`", src.scrutinee))?;
        let mut inner = scope.clone();
        for (b, t) in binders.iter().zip(&arg_types) {
            let v = el.known(t)?;
            inner.push((b.clone(), v));
        }
        let (t, v) = el.term(body, &inner)?;
        el.unify(v, ret, &|| format!("branch `{ctor}` of `{}`", src.name))?;
        branches.push(Branch { ctor, binders, body: t });
    }
    let resolve = |el: &mut Elab<'_>, v: usize, what: &str| {
        el.resolved(v).ok_or_else(|| ElabError(format!("cannot infer the type of {what} in `{}`", src.name)))
    };
    let param_types: Vec<Name> = params
        .iter()
        .zip(&src.params)
        .map(|(v, p)| resolve(&mut el, *v, &format!("`{}`", p.name)))
        .collect::<Result<_>>()?;
    let ret_ty = resolve(&mut el, ret, "the result")?;
    let scrut_ty = env
        .inductive(&param_types[decreasing])
        .ok_or_else(|| ElabError(format!("cannot match on `{}`", src.scrutinee)))?;
    let mut ordered = Vec::new();
    for c in &scrut_ty.ctors {
        let mut hits = branches.iter().filter(|b| b.ctor == c.name);
        let b = hits.next().ok_or_else(|| ElabError(format!("missing branch for `{}`", c.name)))?;
        if hits.next().is_some() {
            return err(format!("duplicate branch for `{}`", c.name));
        }
        ordered.push(b.clone());
    }
    if ordered.len() != branches.len() {
        return err("branch for a constructor of another type");
    }
    let fix = crate::kernel::FixpointFn {
        name: src.name.clone(),
        params: src.params.iter().zip(param_types).map(|(p, ty)| Param { name: p.name.clone(), ty }).collect(),
        ret: ret_ty,
        decreasing,
        branches: ordered,
    };
    Ok((fix, notation))
}
