use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::marker::PhantomData;
use std::sync::Arc;

use im::{OrdMap, Vector};
use num_traits::Float;

use super::features::{featurize, FeatureBag};
use super::sentence::ProofStateView;
use super::view::TacticView;
use super::{Learner, Model};

pub const DEFAULT_K: usize = 20;

#[derive(Debug)]
struct Row {
    bag: FeatureBag,
    key: String,
    tactic: TacticView,
    index: usize,
}

/// Online k-nearest-neighbour model over tf-idf weighted feature bags.
/// `F` is the scalar similarities are computed in.
pub struct KnnModel<F> {
    rows: Vector<Arc<Row>>,
    df: OrdMap<String, usize>,
    k: usize,
    _scalar: PhantomData<fn() -> F>,
}

impl<F> Clone for KnnModel<F> {
    fn clone(&self) -> Self {
        KnnModel { rows: self.rows.clone(), df: self.df.clone(), k: self.k, _scalar: PhantomData }
    }
}

impl<F: Float> Default for KnnModel<F> {
    fn default() -> Self {
        Self::new(DEFAULT_K)
    }
}

impl<F: Float> KnnModel<F> {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "k must be positive");
        KnnModel { rows: Vector::new(), df: OrdMap::new(), k, _scalar: PhantomData }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn document_frequency(&self, feature: &str) -> usize {
        self.df.get(feature).copied().unwrap_or(0)
    }

    /// Frequencies as maintained incrementally.
    pub fn document_frequencies(&self) -> BTreeMap<String, usize> {
        self.df.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Frequencies recounted from the stored rows.
    pub fn recount(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            for f in r.bag.keys() {
                *out.entry(f.clone()).or_default() += 1;
            }
        }
        out
    }

    pub fn with_record(&self, before: &ProofStateView, tactic: &TacticView) -> Self {
        let bag = featurize(before);
        let mut df = self.df.clone();
        for f in bag.keys() {
            *df.entry(f.clone()).or_default() += 1;
        }
        let row = Row { bag, key: tactic.key(), tactic: tactic.clone(), index: self.rows.len() };
        let mut rows = self.rows.clone();
        rows.push_back(Arc::new(row));
        KnnModel { rows, df, k: self.k, _scalar: PhantomData }
    }

    /// Builds a model from a whole record list at once.
    pub fn from_records<'r>(k: usize, records: impl IntoIterator<Item = (&'r ProofStateView, &'r TacticView)>) -> Self {
        let mut rows = Vector::new();
        for (index, (before, tactic)) in records.into_iter().enumerate() {
            rows.push_back(Arc::new(Row { bag: featurize(before), key: tactic.key(), tactic: tactic.clone(), index }));
        }
        let mut model = KnnModel { rows, df: OrdMap::new(), k, _scalar: PhantomData };
        model.df = model.recount().into_iter().collect();
        model
    }

    fn idf(&self, feature: &str) -> F {
        let n = F::from(self.rows.len()).expect("count fits the scalar");
        let df = F::from(self.document_frequency(feature)).expect("count fits the scalar");
        ((F::one() + n) / (F::one() + df)).ln()
    }

    fn weights<'b>(&self, bag: &'b FeatureBag) -> (BTreeMap<&'b str, F>, F) {
        let mut w = BTreeMap::new();
        let mut norm = F::zero();
        for (f, c) in bag {
            let x = F::from(*c).expect("count fits the scalar") * self.idf(f);
            norm = norm + x * x;
            w.insert(f.as_str(), x);
        }
        (w, norm.sqrt())
    }

    pub fn similarity(&self, query: &FeatureBag, row: &FeatureBag) -> F {
        let (q, qn) = self.weights(query);
        let (r, rn) = self.weights(row);
        if qn == F::zero() || rn == F::zero() {
            return F::zero();
        }
        let dot = q.iter().filter_map(|(f, x)| r.get(f).map(|y| *x * *y)).fold(F::zero(), |a, b| a + b);
        dot / (qn * rn)
    }

    /// Candidates with their summed similarity, best first.
    pub fn rank(&self, state: &ProofStateView) -> Vec<(F, TacticView)> {
        let query = featurize(state);
        let mut sims: Vec<(F, &Row)> = self.rows.iter().map(|r| (self.similarity(&query, &r.bag), &**r)).collect();
        sims.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(b.1.index.cmp(&a.1.index)));
        sims.truncate(self.k);
        // key -> (score, most recent row)
        let mut groups: BTreeMap<&str, (F, &Row)> = BTreeMap::new();
        for (s, r) in sims {
            let g = groups.entry(r.key.as_str()).or_insert((F::zero(), r));
            g.0 = g.0 + s;
            if r.index > g.1.index {
                g.1 = r;
            }
        }
        let mut out: Vec<(F, &Row)> = groups.into_values().collect();
        out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(b.1.index.cmp(&a.1.index)));
        out.into_iter().map(|(s, r)| (s, r.tactic.clone())).collect()
    }
}

impl<F: Float + 'static> Model for KnnModel<F> {
    fn add(&self, before: &ProofStateView, tactic: &TacticView, _after: &[ProofStateView]) -> Arc<dyn Model> {
        Arc::new(self.with_record(before, tactic))
    }

    fn predict(&self, state: &ProofStateView) -> Vec<(f64, TacticView)> {
        self.rank(state).into_iter().map(|(s, t)| (s.to_f64().unwrap_or(0.0), t)).collect()
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

pub struct KnnLearner {
    pub k: usize,
}

impl Learner for KnnLearner {
    fn create(&self) -> Arc<dyn Model> {
        Arc::new(KnnModel::<f64>::new(self.k))
    }
}
