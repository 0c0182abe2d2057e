mod common;

use common::{at_lemma, commands, lemma_index, session, source};
use tacit_core::document::{compile, SessionConfig};
use tacit_core::kernel::{check_derivation, check_proof};
use tacit_core::search::{redrive, search, search_failing, suggest, Budget, Status};
use tacit_core::tactic::{print_cache, TacticExpr};

fn budget(nodes: usize, seconds: f64) -> Budget {
    Budget { seconds: Some(seconds), ..Budget::nodes(nodes) }
}

#[test]
fn first_suggestion_after_the_manual_proof_is_intros() {
    let s = at_lemma(&source("lists"), "concat_assoc");
    let st = s.state();
    let list = suggest(&*st.model, &st.goals()[0]);
    assert!(!list.is_empty());
    assert_eq!(list[0].tactic.printed(), "intros");
    assert!(list.windows(2).all(|w| w[0].score >= w[1].score));
}

#[test]
fn fresh_database_suggests_nothing() {
    let mut s = session();
    s.execute_source("Require Prelude.\nLemma t : O = O.").unwrap();
    assert!(s.execute("suggest.").unwrap().suggestions.is_empty());
    let st = s.state();
    let out = search(&st.env, &*st.model, &st.goals()[0], &Budget::nodes(100));
    assert_eq!(out.status, Status::Exhausted);
    assert!(out.expansions <= 1);
}

#[test]
fn search_proves_concat_assoc() {
    let s = at_lemma(&source("lists"), "concat_assoc");
    let st = s.state();
    let goal = &st.goals()[0];
    let out = search(&st.env, &*st.model, goal, &budget(5000, 10.0));
    assert!(out.found(), "{out:?}");
    assert!(out.checked);
    assert!(out.expansions <= 5000);
    let d = out.derivation.as_ref().unwrap();
    check_derivation(&st.env, d).unwrap();
    check_proof(&st.env, &goal.goal, d).unwrap();
    assert_eq!(out.trace.matches('.').count(), out.proof.len());
}

#[test]
fn search_uses_the_custom_tactic_for_dec2() {
    let s = at_lemma(&source("lists"), "dec2");
    let st = s.state();
    let out = search(&st.env, &*st.model, &st.goals()[0], &budget(20_000, 30.0));
    assert!(out.found());
    let solve = TacticExpr::Call("solve_sublist".into());
    assert!(out.proof.iter().any(|t| *t == solve || t.calls().contains(&"solve_sublist".into())), "{:?}", out.proof);
}

#[test]
fn cache_replays_without_search() {
    let s = at_lemma(&source("lists"), "concat_assoc");
    let st = s.state();
    let goal = &st.goals()[0];
    let found = search(&st.env, &*st.model, goal, &Budget::nodes(5000));
    let again = search_failing(&st.env, &*st.model, goal, &found.proof, &Budget::nodes(5000));
    assert!(again.found());
    assert_eq!(again.expansions, 0);
    assert_eq!(again.proof, found.proof);
}

#[test]
fn cache_string_reparses() {
    let s = at_lemma(&source("lists"), "concat_assoc");
    let st = s.state();
    let found = search(&st.env, &*st.model, &st.goals()[0], &Budget::nodes(5000));
    let cache = print_cache(&found.proof);
    let mut s2 = s.clone();
    s2.execute("Proof.").unwrap();
    let reply = s2.execute(&cache).unwrap();
    assert_eq!(reply.search.unwrap().expansions, 0);
    assert_eq!(reply.messages, [cache]);
    s2.execute("Qed.").unwrap();
}

/// Renames `concat_nil_r` and gives `dec2` a cached proof that still uses
/// the old name.
fn mutated(cache: &str) -> String {
    source("lists")
        .replace("Lemma concat_nil_r", "Lemma concat_nil_right")
        .replace("rewrite concat_nil_r.", "rewrite concat_nil_right.")
        .replace(
            "sublist (7::9::13::ls₁) (8::5::7::[] ++ 9::13::ls₂ ++ []).\nProof. search. Qed.",
            &format!("sublist (7::9::13::ls₁) (8::5::7::[] ++ 9::13::ls₂ ++ []).\nProof. {cache}. Qed."),
        )
}

#[test]
fn stale_cache_falls_back_to_search() {
    let s = at_lemma(&source("lists"), "dec2");
    let st = s.state();
    let found = search(&st.env, &*st.model, &st.goals()[0], &budget(20_000, 30.0));
    let cache = print_cache(&found.proof);
    assert!(cache.contains("concat_nil_r"), "{cache}");

    let src = mutated(&cache);
    assert!(src.contains(&cache));
    let cmds = commands(&src);
    let mut m = session();
    for c in &cmds[..=lemma_index(&cmds, "dec2")] {
        m.execute(c).unwrap();
    }
    let st = m.state();
    let goal = &st.goals()[0];
    let out = search_failing(&st.env, &*st.model, goal, &found.proof, &budget(20_000, 30.0));
    assert!(out.found());
    assert!(out.expansions > 0);
    assert_ne!(out.proof, found.proof);
    check_proof(&st.env, &goal.goal, out.derivation.as_ref().unwrap()).unwrap();

    let unit = compile("lists", &src, common::resolver(), &SessionConfig::default()).unwrap();
    assert!(unit.lemmas.iter().any(|l| l.name.as_str() == "dec2"));
}

#[test]
fn traces_redrive_to_the_same_proof() {
    for (file, lemma) in [("lists", "concat_assoc"), ("lists", "dec2"), ("nat", "add_assoc"), ("nat", "double_add")] {
        let s = at_lemma(&source(file), lemma);
        let st = s.state();
        let b = Budget::nodes(5000);
        let out = search(&st.env, &*st.model, &st.goals()[0], &b);
        assert!(out.found(), "{lemma}");
        let again = redrive(&st.env, &*st.model, &st.goals()[0], &out.ranks, &b).unwrap();
        assert_eq!(again, out.proof, "{lemma}");
    }
}

#[test]
fn cancellation_stops_the_search() {
    let s = at_lemma(&source("lists"), "concat_assoc");
    let st = s.state();
    let cancel = std::sync::Arc::new(std::sync::atomic::AtomicBool::new(true));
    let b = Budget { cancel: Some(cancel), ..Budget::nodes(5000) };
    let out = search(&st.env, &*st.model, &st.goals()[0], &b);
    assert_eq!(out.status, Status::Cancelled);
    assert_eq!(out.expansions, 0);
}

#[test]
fn node_budget_is_respected() {
    let s = at_lemma(&source("nat"), "add_comm");
    let st = s.state();
    for n in [1, 3, 10] {
        let out = search(&st.env, &*st.model, &st.goals()[0], &Budget::nodes(n));
        assert!(out.expansions <= n);
    }
}
