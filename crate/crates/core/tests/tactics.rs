mod common;

use common::{at_lemma, session, source};
use tacit_core::document::Session;
use tacit_core::kernel::{check_derivation, HypKind, ProofState};
use tacit_core::syntax::print_formula;
use tacit_core::tactic::{execute, run_first, ExecError, Success, TacticExpr, DEFAULT_FUEL};

struct Goal {
    session: Session,
}

impl Goal {
    fn lemma(file: &str, name: &str) -> Goal {
        Goal { session: at_lemma(&source(file), name) }
    }

    fn statement(src: &str) -> Goal {
        let mut session = session();
        session.execute_source(&format!("Require Prelude.\n{}", source_head())).unwrap();
        session.execute(src).unwrap();
        Goal { session }
    }

    fn state(&self) -> ProofState {
        self.session.state().goals()[0].clone()
    }

    fn run(&self, t: &str) -> Result<Option<Success>, ExecError> {
        let t: TacticExpr = t.parse().unwrap();
        run_first(&self.session.state().env, &self.state(), &t, DEFAULT_FUEL)
    }

    fn ok(&self, t: &str) -> Success {
        self.run(t).unwrap().unwrap_or_else(|| panic!("`{t}` failed"))
    }

    fn fails(&self, t: &str) -> bool {
        matches!(self.run(t), Ok(None))
    }

    fn goals(&self, t: &str) -> Vec<String> {
        let env = &self.session.state().env;
        self.ok(t).goals.iter().map(|g| print_formula(env, &g.goal)).collect()
    }

    fn closes(&self, t: &str) {
        let s = self.ok(t);
        assert!(s.goals.is_empty(), "`{t}` left {} goals", s.goals.len());
        let d = s.build(vec![]);
        assert_eq!(d.conclusion, self.state());
        check_derivation(&self.session.state().env, &d).unwrap();
    }
}

/// Lists, concatenation and sublists without any lemmas.
fn source_head() -> String {
    let src = source("lists");
    let end = src.find("Lemma concat_nil_r").unwrap();
    let ltac = src.find("Inductive sublist").unwrap();
    let ltac_end = src.find("Lemma ex1").unwrap();
    format!("{}\n{}", &src[src.find("Inductive list").unwrap()..end], &src[ltac..ltac_end])
}

fn hyp_names(s: &ProofState) -> Vec<String> {
    s.hyps.iter().map(|h| h.name.to_string()).collect()
}

#[test]
fn intro_then_reflexivity_records_two_steps() {
    let g = Goal::statement("Lemma t : ∀ ls, ls ++ [] ++ [] = ls ++ [].");
    let t: TacticExpr = "intro; reflexivity".parse().unwrap();
    let s = execute(&g.session.state().env, &g.state(), &t, DEFAULT_FUEL).next().unwrap().unwrap();
    assert!(s.goals.is_empty());
    let printed: Vec<_> = s.records.iter().map(|r| r.printed()).collect();
    assert_eq!(printed, ["intro", "reflexivity"]);
    assert_eq!(s.records[1].before.hyps.len(), 1);
}

#[test]
fn intros_names_follow_the_binders() {
    let g = Goal::lemma("lists", "concat_assoc");
    let s = g.ok("intros");
    assert_eq!(hyp_names(&s.goals[0]), ["ls₁", "ls₂", "ls₃"]);
    let s = g.ok("intro xs");
    assert_eq!(hyp_names(&s.goals[0]), ["xs"]);
}

#[test]
fn alternatives_and_failure() {
    let g = Goal::statement("Lemma t : ∀ ls, [] ++ ls = ls.");
    assert!(g.fails("fail"));
    assert!(g.fails("reflexivity; fail"));
    g.closes("fail + (intros; reflexivity)");
    g.closes("(intros; symmetry; fail) + (intro; simpl; reflexivity)");
    assert!(g.fails("solve [intros]"));
    g.closes("solve [intros; reflexivity]");
}

#[test]
fn sequencing_backtracks_into_earlier_alternatives() {
    let g = Goal::statement("Lemma t : ∀ ls, ls = [] ++ ls.");
    // The first branch succeeds but leaves a goal that `reflexivity` cannot
    // close without `intro`; the sequence must backtrack into the second.
    g.closes("(symmetry + intro); reflexivity");
}

#[test]
fn solve_sublist_closes_ex1() {
    let g = Goal::lemma("lists", "ex1");
    g.closes("solve_sublist");
    let s = g.ok("solve_sublist");
    assert_eq!(s.records.len(), 1);
    assert_eq!(s.records[0].printed(), "solve_sublist");
}

#[test]
fn match_falls_through_to_later_arms() {
    let g = Goal::lemma("lists", "ex1");
    g.closes("match goal with | |- sublist [] [] => apply sl_nil | |- sublist _ _ => solve_sublist end");
    g.closes("match goal with | |- sublist _ _ => fail | |- _ => solve_sublist end");
    assert!(g.fails("match goal with | |- _ = _ => reflexivity end"));
}

#[test]
fn solve_sublist_refuses_impossible_goals() {
    let g = Goal::statement("Lemma t : sublist (1::[]) [].");
    assert!(g.fails("solve_sublist"));
    let g = Goal::statement("Lemma t : sublist (1::2::[]) (2::1::[]).");
    assert!(g.fails("solve_sublist"));
}

#[test]
fn f_equal_splits_constructor_equations() {
    let g = Goal::statement("Lemma t : ∀ n ls ks, ls = ks -> n :: ls = n :: ks.");
    let s = g.ok("intros; f_equal");
    assert_eq!(s.goals.len(), 1);
    let env = &g.session.state().env;
    assert_eq!(print_formula(env, &s.goals[0].goal), "ls = ks");
    g.closes("intros; f_equal; assumption");
    assert!(g.fails("f_equal"));
}

#[test]
fn induction_names_cases_and_hypotheses() {
    let g = Goal::lemma("lists", "concat_assoc");
    let s = g.ok("intros; induction ls₁");
    assert_eq!(s.goals.len(), 2);
    assert_eq!(hyp_names(&s.goals[0]), ["ls₂", "ls₃"]);
    assert_eq!(hyp_names(&s.goals[1]), ["ls₂", "ls₃", "n", "ls₁", "IHls₁"]);
    assert!(matches!(s.goals[1].hyps[4].kind, HypKind::Prop(_)));
    let s = g.ok("intros; destruct ls₁");
    assert_eq!(hyp_names(&s.goals[1]), ["ls₂", "ls₃", "n", "ls₁"]);
}

#[test]
fn induction_on_a_quantified_variable_introduces_it() {
    let g = Goal::lemma("nat", "add_O_r");
    g.closes("intros; induction n; simpl; (reflexivity + (f_equal; apply IHn))");
}

#[test]
fn rewriting_in_both_directions() {
    let g = Goal::lemma("lists", "ex2");
    assert_eq!(g.goals("intro; rewrite concat_nil_r"), ["1 :: 2 :: ls = 1 :: 2 :: ls"]);
    g.closes("intro; rewrite concat_nil_r; reflexivity");
    let h = Goal::lemma("nat", "add_eq_l");
    h.closes("intros; rewrite H; reflexivity");
    assert_eq!(h.goals("intros; rewrite <- H"), ["add n m = add n m"]);
}

#[test]
fn rewriting_refuses_bound_occurrences() {
    let g = Goal::lemma("lists", "dec2");
    assert!(g.fails("rewrite concat_nil_r"));
    assert!(!g.fails("intros; rewrite concat_nil_r"));
}

#[test]
fn apply_and_exact_work_modulo_computation() {
    let g = Goal::lemma("nat", "le_O_1");
    g.closes("apply le_S; apply le_n");
    assert!(g.fails("exact le_n"));
    let h = Goal::lemma("nat", "le_step");
    h.closes("intros; apply le_S; exact H");
    assert_eq!(h.ok("intros; auto").goals.len(), 1);
    h.closes("intros; auto; apply le_S; auto");
}

#[test]
fn unknown_references_are_errors() {
    let g = Goal::lemma("lists", "ex2");
    assert_eq!(g.run("apply nowhere").err(), Some(ExecError::UnknownReference("nowhere".into())));
    assert!(g.run("undefined_tactic").is_err());
}

#[test]
fn runaway_recursion_exhausts_fuel() {
    let mut session = session();
    session.execute_source("Require Prelude.\nLtac spin := spin.\nLemma t : O = O.").unwrap();
    let g = Goal { session };
    assert_eq!(g.run("spin").err(), Some(ExecError::FuelExhausted));
    g.closes("reflexivity + spin");
}

#[test]
fn repeat_runs_until_no_progress() {
    let g = Goal::lemma("lists", "concat_assoc");
    let s = g.ok("repeat intro");
    assert_eq!(hyp_names(&s.goals[0]), ["ls₁", "ls₂", "ls₃"]);
    let ex = Goal::lemma("lists", "ex1");
    let s = ex.ok("repeat (apply sl_cons₁ + apply sl_cons₂)");
    assert_eq!(s.goals.len(), 1);
}

#[test]
fn auto_leaves_unprovable_goals_alone() {
    let g = Goal::lemma("lists", "concat_assoc");
    let s = g.ok("auto");
    assert_eq!(s.goals, vec![g.state()]);
}

#[test]
fn simpl_computes_and_keeps_stuck_terms() {
    let g = Goal::lemma("lists", "concat_assoc");
    assert_eq!(g.ok("simpl").goals, vec![g.state()]);
    assert_eq!(
        g.goals("intros; induction ls₁; simpl"),
        ["ls₂ ++ ls₃ = ls₂ ++ ls₃", "n :: (ls₁ ++ ls₂) ++ ls₃ = n :: ls₁ ++ ls₂ ++ ls₃"]
    );
}
