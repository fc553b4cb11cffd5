//! Random forest: bootstrap-resampled trees, best splits within a random
//! feature subset, probabilities averaged over trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{Splitter, Tree, TreeConfig};
use super::ForestParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Fits `n_estimators` trees, each from its own rng seeded
    /// `seed ^ tree_index` so trees are independent of build order.
    pub fn fit(x: &[Vec<f64>], y: &[u8], params: &ForestParams, seed: u64) -> ForestModel {
        let n = x.len();
        let n_features = x[0].len();
        let config = TreeConfig {
            criterion: params.criterion,
            splitter: Splitter::Best,
            max_depth: params.max_depth,
            min_samples_leaf: params.min_samples_leaf,
            min_samples_split: params.min_samples_split,
            max_features: params.max_features.map(|m| m.min(n_features)),
            min_impurity_split: None,
        };
        let trees = (0..params.n_estimators)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
                let indices: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Tree::fit_on(x, y, indices, &config, &mut rng)
            })
            .collect();
        ForestModel { trees }
    }

    /// Mean of per-tree leaf proportions.
    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; 2] {
        let mut acc = [0.0; 2];
        for tree in &self.trees {
            let p = tree.predict_proba(row);
            acc[0] += p[0];
            acc[1] += p[1];
        }
        let k = self.trees.len() as f64;
        [acc[0] / k, acc[1] / k]
    }

    /// Per-feature importance: raw impurity decreases averaged over
    /// trees, then normalized to sum 1 (all zeros if no tree split).
    pub fn gini_importance(&self) -> Vec<f64> {
        let d = self.trees.first().map_or(0, |t| t.n_features);
        let mut total = vec![0.0; d];
        for tree in &self.trees {
            for (t, r) in total.iter_mut().zip(&tree.raw_importance) {
                *t += r;
            }
        }
        let k = self.trees.len() as f64;
        total.iter_mut().for_each(|t| *t /= k);
        normalize(total)
    }
}

pub(super) fn normalize(mut values: Vec<f64>) -> Vec<f64> {
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let v = if i < 20 { -1.0 - (i as f64) * 0.05 } else { 1.0 + (i as f64) * 0.05 };
                vec![v, ((i * 37) % 11) as f64 / 11.0]
            })
            .collect();
        let y: Vec<u8> = (0..40).map(|i| (i >= 20) as u8).collect();
        (x, y)
    }

    #[test]
    fn has_requested_tree_count_and_fits() {
        let (x, y) = separable();
        let model = ForestModel::fit(&x, &y, &ForestParams::default(), 3);
        assert_eq!(model.trees.len(), 20);
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(row, &label)| {
                let p = model.predict_proba_row(row);
                ((p[1] > p[0]) as u8) == label
            })
            .count();
        assert!(correct >= 38, "correct = {correct}");
    }

    #[test]
    fn importance_prefers_informative_feature() {
        let (x, y) = separable();
        let model = ForestModel::fit(&x, &y, &ForestParams::default(), 3);
        let imp = model.gini_importance();
        assert!(imp[0] > imp[1]);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_per_seed() {
        let (x, y) = separable();
        let a = ForestModel::fit(&x, &y, &ForestParams::default(), 11);
        let b = ForestModel::fit(&x, &y, &ForestParams::default(), 11);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
