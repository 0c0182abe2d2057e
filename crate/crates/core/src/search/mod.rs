//! Suggestion-guided best-first proof search and the replayable cache.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::Instant;

use im::{OrdSet, Vector};

use crate::kernel::{check_derivation, Derivation, Environment, ProofState};
use crate::learner::{encode_state, remap_locals, Model, TacticView};
use crate::tactic::{assemble, run_first, Success, TacticExpr, DEFAULT_FUEL};

/// Floor on normalized scores so a zero-score suggestion has finite cost.
const MIN_SCORE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Budget {
    pub nodes: usize,
    /// Wall-clock limit; `None` disables it.
    pub seconds: Option<f64>,
    pub breadth: usize,
    pub fuel: usize,
    pub cancel: Option<Arc<AtomicBool>>,
    /// Receives the expansion count as search proceeds.
    pub progress: Option<Arc<AtomicUsize>>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { nodes: 50_000, seconds: Some(10.0), breadth: 10, fuel: DEFAULT_FUEL, cancel: None, progress: None }
    }
}

impl Budget {
    pub fn nodes(nodes: usize) -> Self {
        Budget { nodes, seconds: None, ..Budget::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    pub score: f64,
    pub tactic: TacticView,
}

/// Learner predictions for `state`, with locals remapped into its context.
/// Entries whose locals cannot be remapped are dropped.
pub fn suggest(model: &dyn Model, state: &ProofState) -> Vec<Suggestion> {
    let view = encode_state(state);
    model
        .predict(&view)
        .into_iter()
        .filter_map(|(score, t)| remap_locals(&view, &t).map(|tactic| Suggestion { score, tactic }))
        .collect()
}

pub fn format_trace(ranks: &[usize]) -> String {
    ranks.iter().map(|r| format!(".{r}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Found,
    Exhausted,
    Cancelled,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub status: Status,
    /// Tactics in execution order, each applied to the first open goal.
    pub proof: Vec<TacticExpr>,
    pub ranks: Vec<usize>,
    pub trace: String,
    pub expansions: usize,
    pub elapsed: f64,
    pub checked: bool,
    pub derivation: Option<Derivation>,
}

impl SearchOutcome {
    pub fn found(&self) -> bool {
        self.status == Status::Found
    }

    fn failed(status: Status, expansions: usize, start: Instant) -> Self {
        SearchOutcome {
            status,
            proof: Vec::new(),
            ranks: Vec::new(),
            trace: String::new(),
            expansions,
            elapsed: start.elapsed().as_secs_f64(),
            checked: false,
            derivation: None,
        }
    }
}

#[derive(Clone)]
struct Step {
    rank: usize,
    tactic: TacticExpr,
    success: Success,
}

struct Node {
    goals: Vec<ProofState>,
    steps: Vector<Step>,
    visited: OrdSet<Vec<ProofState>>,
    cost: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// BinaryHeap pops the greatest: cheapest first, then oldest.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then(other.seq.cmp(&self.seq))
    }
}

/// Whole sequents: induction can bring back a goal formula under a
/// stronger context.
fn goal_multiset(goals: &[ProofState]) -> Vec<ProofState> {
    let mut v = goals.to_vec();
    v.sort();
    v
}

/// A derivation of `root` passing the checker, if the steps close it.
fn checked(env: &Environment, root: &ProofState, steps: &[&Success]) -> Option<Derivation> {
    let d = assemble(steps.iter().copied())?;
    (d.conclusion == *root && check_derivation(env, &d).is_ok()).then_some(d)
}

fn normalized(suggestions: &[Suggestion]) -> Vec<f64> {
    let total: f64 = suggestions.iter().map(|s| s.score).sum();
    if total > 0.0 {
        suggestions.iter().map(|s| s.score / total).collect()
    } else {
        vec![1.0 / suggestions.len() as f64; suggestions.len()]
    }
}

pub fn search(env: &Environment, model: &dyn Model, state: &ProofState, budget: &Budget) -> SearchOutcome {
    let start = Instant::now();
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let root_key = goal_multiset(std::slice::from_ref(state));
    heap.push(Node {
        goals: vec![state.clone()],
        steps: Vector::new(),
        visited: OrdSet::unit(root_key),
        cost: 0.0,
        seq,
    });
    let mut expansions = 0;
    while let Some(node) = heap.pop() {
        if budget.cancel.as_ref().is_some_and(|c| c.load(AtomicOrdering::Relaxed)) {
            return SearchOutcome::failed(Status::Cancelled, expansions, start);
        }
        if expansions >= budget.nodes || budget.seconds.is_some_and(|s| start.elapsed().as_secs_f64() >= s) {
            return SearchOutcome::failed(Status::Exhausted, expansions, start);
        }
        expansions += 1;
        if let Some(p) = &budget.progress {
            p.store(expansions, AtomicOrdering::Relaxed);
        }
        let goal = &node.goals[0];
        let mut suggestions = suggest(model, goal);
        suggestions.truncate(budget.breadth);
        let weights = normalized(&suggestions);
        for (rank, (sugg, w)) in suggestions.iter().zip(weights).enumerate() {
            let tactic = sugg.tactic.tactic();
            let Ok(Some(success)) = run_first(env, goal, tactic, budget.fuel) else {
                continue;
            };
            let mut goals = success.goals.clone();
            goals.extend(node.goals[1..].iter().cloned());
            let key = goal_multiset(&goals);
            if !goals.is_empty() && node.visited.contains(&key) {
                continue;
            }
            let mut steps = node.steps.clone();
            steps.push_back(Step { rank, tactic: tactic.clone(), success });
            if goals.is_empty() {
                let all: Vec<&Success> = steps.iter().map(|s| &s.success).collect();
                if let Some(d) = checked(env, state, &all) {
                    let ranks: Vec<usize> = steps.iter().map(|s| s.rank).collect();
                    return SearchOutcome {
                        status: Status::Found,
                        proof: steps.iter().map(|s| s.tactic.clone()).collect(),
                        trace: format_trace(&ranks),
                        ranks,
                        expansions,
                        elapsed: start.elapsed().as_secs_f64(),
                        checked: true,
                        derivation: Some(d),
                    };
                }
                continue;
            }
            seq += 1;
            heap.push(Node {
                goals,
                steps,
                visited: node.visited.update(key),
                cost: node.cost - w.max(MIN_SCORE).ln(),
                seq,
            });
        }
    }
    SearchOutcome::failed(Status::Exhausted, expansions, start)
}

/// Runs `tactics` in order, each on the first open goal.
pub fn replay(env: &Environment, state: &ProofState, tactics: &[TacticExpr], fuel: usize) -> Option<Derivation> {
    let mut goals = vec![state.clone()];
    let mut steps = Vec::new();
    for t in tactics {
        let goal = goals.first()?.clone();
        let s = run_first(env, &goal, t, fuel).ok()??;
        goals.splice(0..1, s.goals.iter().cloned());
        steps.push(s);
    }
    if !goals.is_empty() {
        return None;
    }
    let refs: Vec<&Success> = steps.iter().collect();
    checked(env, state, &refs)
}

/// Replays the cache; on any failure starts over with a fresh search.
pub fn search_failing(
    env: &Environment,
    model: &dyn Model,
    state: &ProofState,
    cache: &[TacticExpr],
    budget: &Budget,
) -> SearchOutcome {
    let start = Instant::now();
    if let Some(d) = replay(env, state, cache, budget.fuel) {
        return SearchOutcome {
            status: Status::Found,
            proof: cache.to_vec(),
            ranks: Vec::new(),
            trace: String::new(),
            expansions: 0,
            elapsed: start.elapsed().as_secs_f64(),
            checked: true,
            derivation: Some(d),
        };
    }
    search(env, model, state, budget)
}

/// Follows `ranks` through the suggestion lists, returning the tactics chosen.
pub fn redrive(
    env: &Environment,
    model: &dyn Model,
    state: &ProofState,
    ranks: &[usize],
    budget: &Budget,
) -> Option<Vec<TacticExpr>> {
    let mut goals = vec![state.clone()];
    let mut proof = Vec::new();
    for &r in ranks {
        let goal = goals.first()?.clone();
        let mut suggestions = suggest(model, &goal);
        suggestions.truncate(budget.breadth);
        let t = suggestions.get(r)?.tactic.tactic().clone();
        let s = run_first(env, &goal, &t, budget.fuel).ok()??;
        goals.splice(0..1, s.goals.iter().cloned());
        proof.push(t);
    }
    goals.is_empty().then_some(proof)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traces() {
        assert_eq!(format_trace(&[0, 0, 0, 5, 5, 2, 1, 0, 5, 1, 5, 1]), ".0.0.0.5.5.2.1.0.5.1.5.1");
        assert_eq!(format_trace(&[]), "");
        assert_eq!(format_trace(&[3]), ".3");
    }
}
