//! Pluggable online learners over sentence-encoded proof states.

pub mod features;
pub mod knn;
pub mod recency;
pub mod sentence;
pub mod view;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock, RwLock};

pub use features::{featurize, FeatureBag};
pub use knn::{KnnLearner, KnnModel, DEFAULT_K};
pub use recency::{RecencyLearner, RecencyModel};
pub use sentence::{encode_formula, encode_state, encode_tactic, encode_term, ProofStateView, Sentence, SOLVED};
pub use view::{remap_locals, LearnerError, TacticView};

pub const DEFAULT_LEARNER: &str = "knn";

/// A persistent model: `add` returns a new model and leaves `self` usable.
pub trait Model: Send + Sync {
    fn add(&self, before: &ProofStateView, tactic: &TacticView, after: &[ProofStateView]) -> Arc<dyn Model>;
    /// Scored candidates, best first, one per tactic key.
    fn predict(&self, state: &ProofStateView) -> Vec<(f64, TacticView)>;
    fn len(&self) -> usize;
}

pub trait Learner: Send + Sync {
    fn create(&self) -> Arc<dyn Model>;
}

type Registry = RwLock<BTreeMap<String, Arc<dyn Learner>>>;

fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut m: BTreeMap<String, Arc<dyn Learner>> = BTreeMap::new();
        m.insert(DEFAULT_LEARNER.to_string(), Arc::new(KnnLearner { k: DEFAULT_K }));
        RwLock::new(m)
    })
}

pub fn register_learner(name: &str, learner: Arc<dyn Learner>) -> Result<(), LearnerError> {
    let mut r = registry().write().expect("learner registry poisoned");
    if r.contains_key(name) {
        return Err(LearnerError::DuplicateLearner(name.to_string()));
    }
    r.insert(name.to_string(), learner);
    Ok(())
}

pub fn select_learner(name: &str) -> Result<Arc<dyn Learner>, LearnerError> {
    registry()
        .read()
        .expect("learner registry poisoned")
        .get(name)
        .cloned()
        .ok_or_else(|| LearnerError::UnknownLearner(name.to_string()))
}

pub fn learner_names() -> Vec<String> {
    registry().read().expect("learner registry poisoned").keys().cloned().collect()
}
