use std::collections::BTreeSet;
use std::sync::Arc;

use im::Vector;

use super::sentence::ProofStateView;
use super::view::TacticView;
use super::{Learner, Model};

/// Ignores the state and suggests the most recently recorded tactics.
#[derive(Clone, Default)]
pub struct RecencyModel {
    rows: Vector<TacticView>,
}

impl Model for RecencyModel {
    fn add(&self, _before: &ProofStateView, tactic: &TacticView, _after: &[ProofStateView]) -> Arc<dyn Model> {
        let mut rows = self.rows.clone();
        rows.push_back(tactic.clone());
        Arc::new(RecencyModel { rows })
    }

    fn predict(&self, _state: &ProofStateView) -> Vec<(f64, TacticView)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (i, t) in self.rows.iter().enumerate().rev() {
            if seen.insert(t.key()) {
                out.push(((i + 1) as f64, t.clone()));
            }
        }
        out
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

pub struct RecencyLearner;

impl Learner for RecencyLearner {
    fn create(&self) -> Arc<dyn Model> {
        Arc::new(RecencyModel::default())
    }
}
