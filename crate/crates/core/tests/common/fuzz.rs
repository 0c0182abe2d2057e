//! Random tactic expressions over fixture goals, and single-node edits of
//! derivations.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;
use tacit_core::kernel::{check_derivation, Derivation, Direction, Environment, Formula, HypKind, Name, ProofState};
use tacit_core::tactic::{execute, TacticExpr};

/// Names a tactic might sensibly mention in `state`.
pub fn references(env: &Environment, state: &ProofState) -> Vec<Name> {
    let mut out: Vec<Name> = state.hyps.iter().map(|h| h.name.clone()).collect();
    out.extend(env.lemmas().map(|(n, _)| n.clone()));
    for n in ["sl_nil", "sl_cons₁", "sl_cons₂", "le_n", "le_S", "IHls", "nowhere"] {
        out.push(n.into());
    }
    out
}

pub fn tactic(rng: &mut StdRng, refs: &[Name], tactics: &[Name], depth: u32) -> TacticExpr {
    let pick = |rng: &mut StdRng| refs.choose(rng).cloned().unwrap_or_else(|| "x".into());
    if depth == 0 || rng.random_bool(0.55) {
        return match rng.random_range(0..16) {
            0 => TacticExpr::Intros,
            1 => TacticExpr::Intro(None),
            2 => TacticExpr::Apply(pick(rng)),
            3 => TacticExpr::Exact(pick(rng)),
            4 => TacticExpr::Rewrite(Direction::Forward, pick(rng)),
            5 => TacticExpr::Rewrite(Direction::Backward, pick(rng)),
            6 => TacticExpr::Reflexivity,
            7 => TacticExpr::Symmetry,
            8 => TacticExpr::Assumption,
            9 => TacticExpr::FEqual,
            10 => TacticExpr::Simpl,
            11 => TacticExpr::Induction(pick(rng)),
            12 => TacticExpr::Destruct(pick(rng)),
            13 => TacticExpr::Auto,
            14 => tactics.choose(rng).map_or(TacticExpr::Fail, |n| TacticExpr::Call(n.clone())),
            _ => TacticExpr::Fail,
        };
    }
    let sub = |rng: &mut StdRng| Box::new(tactic(rng, refs, tactics, depth - 1));
    match rng.random_range(0..5) {
        0 | 1 => TacticExpr::Seq(sub(rng), sub(rng)),
        2 => TacticExpr::Alt(sub(rng), sub(rng)),
        3 => TacticExpr::Solve(sub(rng)),
        _ => TacticExpr::Repeat(sub(rng)),
    }
}

/// Derivations that differ from `d` in exactly one node's conclusion.
pub fn mutations(d: &Derivation) -> Vec<Derivation> {
    let mut out = Vec::new();
    for path in d.paths() {
        let node = d.node(&path).expect("path from paths()");
        let goal = &node.conclusion.goal;
        let mut edits = vec![Formula::imp(goal.clone(), goal.clone())];
        if let Formula::Eq { lhs, rhs, ty } = goal {
            if lhs != rhs {
                edits.push(Formula::eq(rhs.clone(), lhs.clone(), ty.clone()));
            }
        }
        for g in edits {
            let mut m = d.clone();
            m.node_mut(&path).expect("same shape").conclusion.goal = g;
            out.push(m);
        }
        if let Some(pos) = node.conclusion.hyps.iter().rposition(|h| matches!(h.kind, HypKind::Prop(_))) {
            let mut m = d.clone();
            m.node_mut(&path).expect("same shape").conclusion.hyps.remove(pos);
            out.push(m);
        }
    }
    out
}

/// What the system accepts as a proof of `goal`.
pub fn accepted(env: &Environment, goal: &ProofState, d: &Derivation) -> bool {
    &d.conclusion == goal && check_derivation(env, d).is_ok()
}

#[derive(Debug, Default)]
pub struct FuzzReport {
    pub tactics: usize,
    pub closed: usize,
    pub unsound: Vec<String>,
    pub mutants: usize,
    pub mutants_accepted: Vec<String>,
}

/// Runs `count` random tactics over `goals`, checking every proof found and
/// every single-node mutation of it.
pub fn fuzz(goals: &[(Environment, ProofState)], count: usize, rng: &mut StdRng) -> FuzzReport {
    let mut report = FuzzReport::default();
    for _ in 0..count {
        let (env, goal) = goals.choose(rng).expect("some goals");
        let refs = references(env, goal);
        let tactics: Vec<Name> = env
            .declarations()
            .filter_map(|d| match d {
                tacit_core::kernel::Declaration::Tactic(t) => Some(t.name.clone()),
                _ => None,
            })
            .collect();
        let depth = rng.random_range(1..4);
        let t = tactic(rng, &refs, &tactics, depth);
        report.tactics += 1;
        for s in execute(env, goal, &t, 200).take(3) {
            let Ok(s) = s else { break };
            if !s.goals.is_empty() {
                continue;
            }
            report.closed += 1;
            let d = s.build(vec![]);
            if !accepted(env, goal, &d) {
                report.unsound.push(t.to_string());
                continue;
            }
            for m in mutations(&d) {
                report.mutants += 1;
                if accepted(env, goal, &m) {
                    report.mutants_accepted.push(t.to_string());
                }
            }
        }
    }
    report
}
