pub mod document;
pub mod kernel;
pub mod learner;
pub mod search;
pub mod syntax;
pub mod tactic;

pub use learner::KnnModel;

pub type KnnModel64 = KnnModel<f64>;
pub type KnnModel32 = KnnModel<f32>;
