//! Binary classification tree shared by the decision-tree model and the
//! random forest: Gini or entropy impurity, exhaustive or random
//! threshold selection, and weighted impurity-decrease accounting for
//! Gini importance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    /// Impurity of a two-class count vector.
    pub fn impurity(self, counts: [usize; 2]) -> f64 {
        let n = (counts[0] + counts[1]) as f64;
        if n == 0.0 {
            return 0.0;
        }
        let p0 = counts[0] as f64 / n;
        let p1 = counts[1] as f64 / n;
        match self {
            Criterion::Gini => 1.0 - p0 * p0 - p1 * p1,
            Criterion::Entropy => {
                let mut h = 0.0;
                for p in [p0, p1] {
                    if p > 0.0 {
                        h -= p * p.ln();
                    }
                }
                h
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitter {
    /// Exhaustive scan over midpoints between consecutive distinct values.
    Best,
    /// One uniform threshold drawn between the node's min and max per
    /// candidate feature; the feature whose random split decreases
    /// impurity the most wins.
    Random,
}

/// Tree-growing settings; the model-level specs map onto this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub criterion: Criterion,
    pub splitter: Splitter,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    /// Features considered per split (sampled without replacement);
    /// `None` means all.
    pub max_features: Option<usize>,
    /// Nodes with impurity at or below this never split. Values outside
    /// the legal impurity range are ignored (treated as disabled).
    pub min_impurity_split: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; 2],
    },
}

/// A fitted tree plus the raw (unnormalized) impurity-decrease tally per
/// feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
    pub raw_importance: Vec<f64>,
}

impl Tree {
    pub fn fit(x: &[Vec<f64>], y: &[u8], config: &TreeConfig, rng: &mut ChaCha8Rng) -> Tree {
        let indices: Vec<usize> = (0..x.len()).collect();
        Self::fit_on(x, y, indices, config, rng)
    }

    /// Fits on a subset of rows (`indices` may repeat, as with bootstrap
    /// samples). Importance node weights are relative to `indices.len()`.
    pub fn fit_on(
        x: &[Vec<f64>],
        y: &[u8],
        indices: Vec<usize>,
        config: &TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> Tree {
        let n_features = x.first().map_or(0, Vec::len);
        let mut tree = Tree {
            nodes: Vec::new(),
            n_features,
            raw_importance: vec![0.0; n_features],
        };
        let n_total = indices.len();
        tree.grow(x, y, indices, 0, n_total, config, rng);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        x: &[Vec<f64>],
        y: &[u8],
        indices: Vec<usize>,
        depth: usize,
        n_total: usize,
        config: &TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        let counts = class_counts(y, &indices);
        let node_impurity = config.criterion.impurity(counts);

        let depth_reached = config.max_depth.is_some_and(|d| depth >= d);
        let too_small = indices.len() < config.min_samples_split;
        let pure = counts[0] == 0 || counts[1] == 0;
        let impurity_floor = config
            .min_impurity_split
            .filter(|v| (0.0..=1.0).contains(v))
            .is_some_and(|v| node_impurity <= v);

        let split = if depth_reached || too_small || pure || impurity_floor {
            None
        } else {
            self.find_split(x, y, &indices, node_impurity, config, rng)
        };

        match split {
            Some(s) => {
                // weighted impurity decrease, node weight = sample fraction
                self.raw_importance[s.feature] +=
                    indices.len() as f64 / n_total as f64 * s.decrease;
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .into_iter()
                    .partition(|&i| x[i][s.feature] <= s.threshold);
                let node_pos = self.nodes.len();
                self.nodes.push(TreeNode::Leaf { counts }); // placeholder
                let left = self.grow(x, y, left_idx, depth + 1, n_total, config, rng);
                let right = self.grow(x, y, right_idx, depth + 1, n_total, config, rng);
                self.nodes[node_pos] = TreeNode::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
                node_pos
            }
            None => {
                self.nodes.push(TreeNode::Leaf { counts });
                self.nodes.len() - 1
            }
        }
    }

    fn find_split(
        &self,
        x: &[Vec<f64>],
        y: &[u8],
        indices: &[usize],
        node_impurity: f64,
        config: &TreeConfig,
        rng: &mut ChaCha8Rng,
    ) -> Option<SplitChoice> {
        let candidates = candidate_features(self.n_features, config.max_features, rng);
        let mut best: Option<SplitChoice> = None;
        for feature in candidates {
            let candidate = match config.splitter {
                Splitter::Best => {
                    best_threshold(x, y, indices, feature, node_impurity, config)
                }
                Splitter::Random => {
                    random_threshold(x, y, indices, feature, node_impurity, config, rng)
                }
            };
            if let Some(c) = candidate {
                // strict improvement keeps ties on the lowest feature index
                if best.as_ref().is_none_or(|b| c.decrease > b.decrease) {
                    best = Some(c);
                }
            }
        }
        best.filter(|b| b.decrease > 0.0)
    }

    pub fn predict_counts(&self, row: &[f64]) -> [usize; 2] {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf { counts } => return *counts,
            }
        }
    }

    /// Class proportions of the reached leaf, `[p_genuine, p_bot]`.
    pub fn predict_proba(&self, row: &[f64]) -> [f64; 2] {
        let counts = self.predict_counts(row);
        let n = (counts[0] + counts[1]) as f64;
        if n == 0.0 {
            return [0.5, 0.5];
        }
        [counts[0] as f64 / n, counts[1] as f64 / n]
    }

    pub fn n_splits(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Split { .. }))
            .count()
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

fn class_counts(y: &[u8], indices: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &i in indices {
        counts[y[i] as usize] += 1;
    }
    counts
}

/// Feature indices examined at a split, ascending. When fewer than all
/// features are requested they are sampled without replacement.
fn candidate_features(
    n_features: usize,
    max_features: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    match max_features {
        Some(m) if m < n_features => {
            // partial Fisher-Yates over the index pool
            let mut pool: Vec<usize> = (0..n_features).collect();
            for i in 0..m {
                let j = rng.gen_range(i..pool.len());
                pool.swap(i, j);
            }
            let mut chosen = pool[..m].to_vec();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..n_features).collect(),
    }
}

fn weighted_children_impurity(
    criterion: Criterion,
    left: [usize; 2],
    right: [usize; 2],
) -> f64 {
    let n_left = (left[0] + left[1]) as f64;
    let n_right = (right[0] + right[1]) as f64;
    let n = n_left + n_right;
    (n_left * criterion.impurity(left) + n_right * criterion.impurity(right)) / n
}

fn best_threshold(
    x: &[Vec<f64>],
    y: &[u8],
    indices: &[usize],
    feature: usize,
    node_impurity: f64,
    config: &TreeConfig,
) -> Option<SplitChoice> {
    let mut order: Vec<usize> = indices.to_vec();
    order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));

    let total = class_counts(y, indices);
    let mut left = [0usize; 2];
    let mut best: Option<SplitChoice> = None;
    for w in 0..order.len() - 1 {
        left[y[order[w]] as usize] += 1;
        let v = x[order[w]][feature];
        let v_next = x[order[w + 1]][feature];
        if v == v_next {
            continue;
        }
        let n_left = w + 1;
        let n_right = order.len() - n_left;
        if n_left < config.min_samples_leaf || n_right < config.min_samples_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let decrease =
            node_impurity - weighted_children_impurity(config.criterion, left, right);
        if best.as_ref().is_none_or(|b| decrease > b.decrease) {
            best = Some(SplitChoice {
                feature,
                threshold: v + (v_next - v) / 2.0,
                decrease,
            });
        }
    }
    best
}

fn random_threshold(
    x: &[Vec<f64>],
    y: &[u8],
    indices: &[usize],
    feature: usize,
    node_impurity: f64,
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> Option<SplitChoice> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &i in indices {
        min = min.min(x[i][feature]);
        max = max.max(x[i][feature]);
    }
    if min >= max {
        return None;
    }
    let threshold = rng.gen_range(min..max);
    let mut left = [0usize; 2];
    let mut right = [0usize; 2];
    for &i in indices {
        if x[i][feature] <= threshold {
            left[y[i] as usize] += 1;
        } else {
            right[y[i] as usize] += 1;
        }
    }
    let n_left = left[0] + left[1];
    let n_right = right[0] + right[1];
    if n_left < config.min_samples_leaf || n_right < config.min_samples_leaf {
        return None;
    }
    let decrease = node_impurity - weighted_children_impurity(config.criterion, left, right);
    Some(SplitChoice {
        feature,
        threshold,
        decrease,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn xor_free_data() -> (Vec<Vec<f64>>, Vec<u8>) {
        // class 1 iff feature 0 > 0; feature 1 is constant noise
        let x = vec![
            vec![-2.0, 1.0],
            vec![-1.0, 1.0],
            vec![-0.5, 1.0],
            vec![0.5, 1.0],
            vec![1.0, 1.0],
            vec![2.0, 1.0],
        ];
        let y = vec![0, 0, 0, 1, 1, 1];
        (x, y)
    }

    fn config(splitter: Splitter) -> TreeConfig {
        TreeConfig {
            criterion: Criterion::Gini,
            splitter,
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_features: None,
            min_impurity_split: None,
        }
    }

    #[test]
    fn best_split_separates_perfectly() {
        let (x, y) = xor_free_data();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = Tree::fit(&x, &y, &config(Splitter::Best), &mut rng);
        for (row, &label) in x.iter().zip(&y) {
            let p = tree.predict_proba(row);
            assert_eq!((p[1] > p[0]) as u8, label);
        }
        // importance concentrates on feature 0 (feature 1 is constant)
        assert!(tree.raw_importance[0] > 0.0);
        assert_eq!(tree.raw_importance[1], 0.0);
    }

    #[test]
    fn random_split_separates_separable_data() {
        let (x, y) = xor_free_data();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tree = Tree::fit(&x, &y, &config(Splitter::Random), &mut rng);
        for (row, &label) in x.iter().zip(&y) {
            let p = tree.predict_proba(row);
            assert_eq!((p[1] > p[0]) as u8, label);
        }
    }

    #[test]
    fn min_samples_leaf_blocks_tiny_children() {
        let (x, y) = xor_free_data();
        let mut cfg = config(Splitter::Best);
        cfg.min_samples_leaf = 4; // any split would leave a side < 4
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = Tree::fit(&x, &y, &cfg, &mut rng);
        assert_eq!(tree.n_splits(), 0);
    }

    #[test]
    fn out_of_range_min_impurity_split_is_disabled() {
        let (x, y) = xor_free_data();
        let mut cfg = config(Splitter::Best);
        cfg.min_impurity_split = Some(3.0); // outside [0, 1]: ignored
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = Tree::fit(&x, &y, &cfg, &mut rng);
        assert!(tree.n_splits() > 0);
    }

    #[test]
    fn leaf_probability_is_the_class_proportion() {
        // identical rows cannot split: one leaf holding 1 genuine, 3 bots
        let x = vec![vec![2.0]; 4];
        let y = vec![0, 1, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = Tree::fit(&x, &y, &config(Splitter::Best), &mut rng);
        assert_eq!(tree.predict_proba(&[2.0]), [0.25, 0.75]);
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = xor_free_data();
        let t1 = Tree::fit(
            &x,
            &y,
            &config(Splitter::Random),
            &mut ChaCha8Rng::seed_from_u64(9),
        );
        let t2 = Tree::fit(
            &x,
            &y,
            &config(Splitter::Random),
            &mut ChaCha8Rng::seed_from_u64(9),
        );
        assert_eq!(
            serde_json::to_string(&t1).unwrap(),
            serde_json::to_string(&t2).unwrap()
        );
    }
}
