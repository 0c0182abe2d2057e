use crate::kernel::{Environment, ProofState};

use super::engine::{Engine, DEFAULT_FUEL};
use super::expr::TacticExpr;

/// One tactic as it ran: the state before it and the goals it left.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TacticRecord {
    pub before: ProofState,
    pub tactic: TacticExpr,
    pub after: Vec<ProofState>,
}

impl TacticRecord {
    pub fn printed(&self) -> String {
        self.tactic.to_string()
    }

    /// Whether re-running the tactic on `before` reproduces `after`.
    pub fn replays(&self, env: &Environment) -> bool {
        let engine = Engine::new(env, DEFAULT_FUEL);
        match engine.exec(self.before.clone(), &self.tactic, false).next() {
            Some(Ok(s)) => s.goals == self.after,
            _ => false,
        }
    }
}
