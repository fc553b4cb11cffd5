//! K-nearest-neighbor classifier with inverse-distance vote weighting.

use serde::{Deserialize, Serialize};

use super::ball_tree::{brute_force_knn, BallTree, Distance};
use super::{KnnAlgorithm, KnnParams, KnnWeights};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub labels: Vec<u8>,
    pub k: usize,
    pub weights: KnnWeights,
    pub algorithm: KnnAlgorithm,
    pub distance: Distance,
    pub tree: BallTree,
    /// Retained for the brute-force algorithm variant.
    pub points: Vec<Vec<f64>>,
}

impl KnnModel {
    pub fn fit(x: &[Vec<f64>], y: &[u8], params: &KnnParams) -> KnnModel {
        KnnModel {
            labels: y.to_vec(),
            k: params.k,
            weights: params.weights,
            algorithm: params.algorithm,
            distance: params.distance,
            tree: BallTree::build(x.to_vec(), params.distance, params.leaf_size),
            points: x.to_vec(),
        }
    }

    fn neighbors(&self, row: &[f64]) -> Vec<(usize, f64)> {
        match self.algorithm {
            KnnAlgorithm::BallTree => self.tree.query(row, self.k),
            KnnAlgorithm::Brute => brute_force_knn(&self.points, row, self.k, self.distance),
        }
    }

    /// `[p_genuine, p_bot]` from the k neighbors. A zero-distance
    /// neighbor short-circuits the vote to the zero-distance group.
    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; 2] {
        let neighbors = self.neighbors(row);
        if neighbors.is_empty() {
            return [0.5, 0.5];
        }
        let zero: Vec<&(usize, f64)> = neighbors.iter().filter(|(_, d)| *d == 0.0).collect();
        if !zero.is_empty() {
            let mut counts = [0.0; 2];
            for (i, _) in &zero {
                counts[self.labels[*i] as usize] += 1.0;
            }
            let n = zero.len() as f64;
            return [counts[0] / n, counts[1] / n];
        }
        let mut votes = [0.0; 2];
        for (i, d) in &neighbors {
            let w = match self.weights {
                KnnWeights::Distance => 1.0 / d,
                KnnWeights::Uniform => 1.0,
            };
            votes[self.labels[*i] as usize] += w;
        }
        let total = votes[0] + votes[1];
        [votes[0] / total, votes[1] / total]
    }
}
