mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use tacit_core::kernel::{match_formula, match_term, normalize, normalize_formula, Environment, Formula, Name, Term};
use tacit_core::syntax::{elab_formula, parse_expr, print_formula, Expr};
use tacit_core::tactic::{MatchArm, TacticExpr};

fn env() -> &'static Environment {
    static ENV: OnceLock<Environment> = OnceLock::new();
    ENV.get_or_init(|| common::at_lemma(&common::source("lists"), "dec2").state().env.clone())
}

fn scope() -> Vec<(Name, Name)> {
    vec![("n".into(), "nat".into()), ("ls".into(), "list".into()), ("ks".into(), "list".into())]
}

fn nat() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::Ctor("O".into(), vec![])), Just(Term::var("n"))];
    leaf.prop_recursive(3, 8, 1, |inner| inner.prop_map(|t| Term::Ctor("S".into(), vec![t])))
}

fn list() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::Ctor("nil".into(), vec![])), Just(Term::var("ls")), Just(Term::var("ks"))];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (nat(), inner.clone()).prop_map(|(x, l)| Term::Ctor("cons".into(), vec![x, l])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::App("concat".into(), vec![a, b])),
        ]
    })
}

fn closed_list() -> impl Strategy<Value = Term> {
    list().prop_filter("closed", |t| t.free_vars().is_empty())
}

fn formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        (list(), list()).prop_map(|(a, b)| Formula::eq(a, b, "list")),
        (nat(), nat()).prop_map(|(a, b)| Formula::eq(a, b, "nat")),
        (list(), list()).prop_map(|(a, b)| Formula::Pred("sublist".into(), vec![a, b])),
    ];
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            inner.prop_map(|b| Formula::forall("ms", "list", b)),
        ]
    })
}

/// Replaces the subterm at each chosen path with a fresh pattern variable.
fn abstracted(t: &Term, picks: &[usize]) -> (Term, BTreeSet<Name>) {
    let mut out = t.clone();
    let mut vars = BTreeSet::new();
    for (i, pick) in picks.iter().enumerate() {
        let positions = positions(&out);
        let path = &positions[pick % positions.len()];
        let v: Name = format!("?{i}").into();
        if let Some(next) = out.replace(path, &Term::Var(v.clone())) {
            out = next;
            vars.insert(v);
        }
    }
    vars.retain(|v| out.mentions(v));
    (out, vars)
}

fn positions(t: &Term) -> Vec<Vec<usize>> {
    fn walk(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        for (i, a) in t.args().iter().enumerate() {
            path.push(i);
            walk(a, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut out);
    out
}

fn ident() -> impl Strategy<Value = Name> {
    prop_oneof![Just("H"), Just("IHls"), Just("concat_nil_r"), Just("ls₁"), Just("x0")].prop_map(Name::from)
}

fn pattern() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::Wild),
        Just(Expr::Eq(Box::new(Expr::Wild), Box::new(Expr::PatVar("x".into())))),
        Just(Expr::App("sublist".into(), vec![Expr::Nil, Expr::Wild])),
        Just(Expr::App(
            "sublist".into(),
            vec![Expr::Cons(Box::new(Expr::Wild), Box::new(Expr::Wild)), Expr::Nil]
        )),
    ]
}

fn tactic() -> impl Strategy<Value = TacticExpr> {
    use tacit_core::kernel::Direction::*;
    let atom = prop_oneof![
        Just(TacticExpr::Intros),
        Just(TacticExpr::Intro(None)),
        ident().prop_map(|x| TacticExpr::Intro(Some(x))),
        ident().prop_map(TacticExpr::Apply),
        ident().prop_map(TacticExpr::Exact),
        ident().prop_map(|x| TacticExpr::Rewrite(Forward, x)),
        ident().prop_map(|x| TacticExpr::Rewrite(Backward, x)),
        ident().prop_map(TacticExpr::Induction),
        ident().prop_map(TacticExpr::Destruct),
        Just(TacticExpr::Reflexivity),
        Just(TacticExpr::Symmetry),
        Just(TacticExpr::Assumption),
        Just(TacticExpr::FEqual),
        Just(TacticExpr::Simpl),
        Just(TacticExpr::Auto),
        Just(TacticExpr::Fail),
        Just(TacticExpr::Call("solve_sublist".into())),
    ];
    atom.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TacticExpr::seq(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TacticExpr::alt(a, b)),
            inner.clone().prop_map(|t| TacticExpr::Solve(Box::new(t))),
            inner.clone().prop_map(|t| TacticExpr::Repeat(Box::new(t))),
            prop::collection::vec((pattern(), inner), 1..3).prop_map(|arms| {
                TacticExpr::MatchGoal(arms.into_iter().map(|(pattern, body)| MatchArm { pattern, body }).collect())
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_is_idempotent(t in list()) {
        let nf = normalize(env(), &t);
        prop_assert_eq!(normalize(env(), &nf), nf.clone());
        prop_assert_eq!(env().type_of(&scope(), &nf).unwrap(), Name::from("list"));
    }

    #[test]
    fn closed_terms_normalize_to_constructors(t in closed_list()) {
        fn ctor_only(t: &Term) -> bool {
            matches!(t, Term::Ctor(_, args) if args.iter().all(ctor_only))
        }
        prop_assert!(ctor_only(&normalize(env(), &t)));
    }

    #[test]
    fn formula_normalization_is_idempotent(f in formula()) {
        let nf = normalize_formula(env(), &f);
        prop_assert_eq!(normalize_formula(env(), &nf), nf);
    }

    #[test]
    fn matches_instantiate_to_the_subject(t in list(), picks in prop::collection::vec(any::<usize>(), 0..3)) {
        let (p, vars) = abstracted(&t, &picks);
        let sigma = match_term(&p, &t, &vars);
        prop_assert!(sigma.is_some());
        prop_assert_eq!(p.subst(&sigma.unwrap()), t);
    }

    #[test]
    fn any_match_is_sound(p in list(), s in list()) {
        let vars: BTreeSet<Name> = ["ls".into()].into();
        if let Some(sigma) = match_term(&p, &s, &vars) {
            prop_assert_eq!(p.subst(&sigma), s);
        }
    }

    #[test]
    fn formula_matches_are_sound(a in formula(), b in formula()) {
        let vars: BTreeSet<Name> = ["ls".into(), "n".into()].into();
        if let Some(sigma) = match_formula(&a, &b, &vars) {
            prop_assert!(a.subst(&sigma).alpha_eq(&b));
        }
    }

    #[test]
    fn formulas_print_and_reparse(f in formula()) {
        let printed = print_formula(env(), &f);
        let back = elab_formula(env(), &scope(), &parse_expr(&printed).unwrap()).unwrap();
        prop_assert!(back.alpha_eq(&f), "{} reparsed as {:?}", printed, back);
    }

    #[test]
    fn tactics_print_and_reparse(t in tactic()) {
        let printed = t.to_string();
        let back: TacticExpr = printed.parse().unwrap();
        prop_assert_eq!(back, t);
    }
}
