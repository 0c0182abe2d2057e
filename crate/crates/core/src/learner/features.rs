use std::collections::BTreeMap;

use super::sentence::{ProofStateView, Sentence};

/// Multiset of feature strings.
pub type FeatureBag = BTreeMap<String, u32>;

const ANON: &str = "var:⋆";

fn anon(label: &str) -> &str {
    if label.starts_with("var:") {
        ANON
    } else {
        label
    }
}

/// Node labels and parent>child label pairs, with variables anonymized.
pub fn tree_features(prefix: &str, s: &Sentence, bag: &mut FeatureBag) {
    s.visit(&mut |n| {
        let l = anon(&n.label);
        *bag.entry(format!("{prefix}{l}")).or_default() += 1;
        for c in &n.children {
            *bag.entry(format!("{prefix}{l}>{}", anon(&c.label))).or_default() += 1;
        }
    });
}

pub fn featurize(view: &ProofStateView) -> FeatureBag {
    let mut bag = FeatureBag::new();
    tree_features("G:", &view.goal, &mut bag);
    for (_, h) in &view.hyps {
        tree_features("H:", h, &mut bag);
    }
    bag
}

/// Plain count cosine.
pub fn cosine(a: &FeatureBag, b: &FeatureBag) -> f64 {
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| f64::from(*x) * f64::from(*y))).sum();
    let na: f64 = a.values().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| f64::from(*x).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_goal() {
        let v = ProofStateView { hyps: vec![], goal: Sentence::leaf("True") };
        assert_eq!(featurize(&v), FeatureBag::from([("G:True".to_string(), 1)]));
    }

    #[test]
    fn variables_are_anonymized() {
        let goal = Sentence::node("eq", vec![Sentence::leaf("var:ls"), Sentence::leaf("var:ls")]);
        let bag = featurize(&ProofStateView { hyps: vec![], goal });
        let expected =
            FeatureBag::from([("G:eq".into(), 1), ("G:var:⋆".into(), 2), ("G:eq>var:⋆".into(), 2)]);
        assert_eq!(bag, expected);
    }
}
