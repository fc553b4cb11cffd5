//! AdaBoost with the SAMME stage-weight rule over depth-1 decision
//! stumps. Probability is the alpha-weighted vote share.

use serde::{Deserialize, Serialize};

use super::forest::normalize;
use super::AdaboostParams;
use crate::{Error, Result};

/// A depth-1 tree: threshold on one feature, constant class per side.
/// A degenerate stump (no useful split) predicts `left_class` everywhere
/// and carries no importance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left_class: u8,
    pub right_class: u8,
    pub is_split: bool,
    /// Weighted Gini decrease achieved by the split.
    pub decrease: f64,
}

impl Stump {
    pub fn predict(&self, row: &[f64]) -> u8 {
        if !self.is_split || row[self.feature] <= self.threshold {
            self.left_class
        } else {
            self.right_class
        }
    }

    /// Best weighted-Gini split over all features; ties keep the lowest
    /// feature index / lowest threshold.
    pub fn fit(x: &[Vec<f64>], y: &[u8], weights: &[f64]) -> Stump {
        let d = x[0].len();
        let mut totals = [0.0f64; 2];
        for (&label, &w) in y.iter().zip(weights) {
            totals[label as usize] += w;
        }
        let parent_gini = weighted_gini(totals);
        let majority = if totals[1] > totals[0] { 1 } else { 0 };

        let mut best: Option<(f64, usize, f64, u8, u8)> = None; // decrease, feature, threshold, lc, rc
        for feature in 0..d {
            let mut order: Vec<usize> = (0..x.len()).collect();
            order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
            let mut left = [0.0f64; 2];
            for w in 0..order.len() - 1 {
                let i = order[w];
                left[y[i] as usize] += weights[i];
                let v = x[i][feature];
                let v_next = x[order[w + 1]][feature];
                if v == v_next {
                    continue;
                }
                let right = [totals[0] - left[0], totals[1] - left[1]];
                let wl = left[0] + left[1];
                let wr = right[0] + right[1];
                let wt = wl + wr;
                let children =
                    (wl * weighted_gini(left) + wr * weighted_gini(right)) / wt;
                let decrease = parent_gini - children;
                if best.is_none_or(|(b, ..)| decrease > b) {
                    let lc = if left[1] > left[0] { 1 } else { 0 };
                    let rc = if right[1] > right[0] { 1 } else { 0 };
                    best = Some((decrease, feature, v + (v_next - v) / 2.0, lc, rc));
                }
            }
        }

        match best.filter(|&(decrease, ..)| decrease > 0.0) {
            Some((decrease, feature, threshold, lc, rc)) => Stump {
                feature,
                threshold,
                left_class: lc,
                right_class: rc,
                is_split: true,
                decrease,
            },
            None => Stump {
                feature: 0,
                threshold: 0.0,
                left_class: majority,
                right_class: majority,
                is_split: false,
                decrease: 0.0,
            },
        }
    }
}

fn weighted_gini(class_weights: [f64; 2]) -> f64 {
    let w = class_weights[0] + class_weights[1];
    if w <= 0.0 {
        return 0.0;
    }
    let p0 = class_weights[0] / w;
    let p1 = class_weights[1] / w;
    1.0 - p0 * p0 - p1 * p1
}

/// One SAMME boosting round.
///
/// err = sum of weights on misclassified rows, clamped to
/// [1e-10, 1 - 1e-10]; alpha = learning_rate * (ln((1 - err)/err) +
/// ln(n_classes - 1)); new weights are w * exp(alpha) on misclassified
/// rows, renormalized.
pub fn samme_round(
    weights: &[f64],
    predictions: &[u8],
    y: &[u8],
    n_classes: usize,
    learning_rate: f64,
) -> Result<(f64, Vec<f64>)> {
    if predictions.len() != y.len() || weights.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: y.len(),
            actual: predictions.len().max(weights.len()),
        });
    }
    if n_classes < 2 {
        return Err(Error::InvalidArgument("n_classes must be >= 2".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "weights must sum to 1 (got {sum})"
        )));
    }

    let err: f64 = weights
        .iter()
        .zip(predictions.iter().zip(y))
        .filter(|(_, (p, t))| p != t)
        .map(|(w, _)| w)
        .sum();
    let err = err.clamp(1e-10, 1.0 - 1e-10);
    let alpha = learning_rate * (((1.0 - err) / err).ln() + (n_classes as f64 - 1.0).ln());

    let mut new_weights: Vec<f64> = weights
        .iter()
        .zip(predictions.iter().zip(y))
        .map(|(w, (p, t))| if p != t { w * alpha.exp() } else { *w })
        .collect();
    let z: f64 = new_weights.iter().sum();
    new_weights.iter_mut().for_each(|w| *w /= z);
    Ok((alpha, new_weights))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaboostModel {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
}

impl AdaboostModel {
    pub fn fit(x: &[Vec<f64>], y: &[u8], params: &AdaboostParams) -> Result<AdaboostModel> {
        let n = x.len();
        let mut weights = vec![1.0 / n as f64; n];
        let mut stumps = Vec::with_capacity(params.n_estimators);
        let mut alphas = Vec::with_capacity(params.n_estimators);
        for _ in 0..params.n_estimators {
            let stump = Stump::fit(x, y, &weights);
            let predictions: Vec<u8> = x.iter().map(|row| stump.predict(row)).collect();
            let (alpha, new_weights) =
                samme_round(&weights, &predictions, y, 2, params.learning_rate)?;
            weights = new_weights;
            stumps.push(stump);
            alphas.push(alpha);
        }
        Ok(AdaboostModel { stumps, alphas })
    }

    /// Alpha-weighted vote share per class. Weighted-majority stump
    /// leaves keep every round's error at or below 0.5, so alphas are
    /// never negative; an all-zero alpha sum degenerates to [0.5, 0.5].
    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; 2] {
        let mut votes = [0.0; 2];
        for (stump, &alpha) in self.stumps.iter().zip(&self.alphas) {
            votes[stump.predict(row) as usize] += alpha;
        }
        let total = votes[0] + votes[1];
        if total <= 0.0 {
            return [0.5, 0.5];
        }
        [votes[0] / total, votes[1] / total]
    }

    /// Alpha-weighted average of per-stump impurity decreases,
    /// normalized to sum 1.
    pub fn gini_importance(&self, n_features: usize) -> Vec<f64> {
        let mut total = vec![0.0; n_features];
        let alpha_sum: f64 = self.alphas.iter().sum();
        if alpha_sum > 0.0 {
            for (stump, &alpha) in self.stumps.iter().zip(&self.alphas) {
                if stump.is_split {
                    total[stump.feature] += alpha * stump.decrease / alpha_sum;
                }
            }
        }
        normalize(total)
    }

    /// Training error after each boosting round (prefix ensembles).
    pub fn staged_training_error(&self, x: &[Vec<f64>], y: &[u8]) -> Vec<f64> {
        (1..=self.stumps.len())
            .map(|m| {
                let partial = AdaboostModel {
                    stumps: self.stumps[..m].to_vec(),
                    alphas: self.alphas[..m].to_vec(),
                };
                let wrong = x
                    .iter()
                    .zip(y)
                    .filter(|(row, &label)| {
                        let p = partial.predict_proba_row(row);
                        ((p[1] > p[0]) as u8) != label
                    })
                    .count();
                wrong as f64 / x.len() as f64
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn samme_alpha_matches_hand_values() {
        let weights = vec![0.25; 4];
        let y = vec![0, 0, 1, 1];
        // one of four misclassified: err = 0.25
        let (alpha, new_weights) = samme_round(&weights, &[0, 0, 1, 0], &y, 2, 1.0).unwrap();
        assert_abs_diff_eq!(alpha, 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(new_weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // misclassified row weight grows to 3x pre-normalization => 0.5
        assert_abs_diff_eq!(new_weights[3], 0.5, epsilon = 1e-12);

        // coin-flip learner: err = 0.5 -> alpha = 0
        let (alpha, _) = samme_round(&weights, &[0, 1, 1, 0], &y, 2, 1.0).unwrap();
        assert_abs_diff_eq!(alpha, 0.0, epsilon = 1e-12);

        // perfect learner: clamped err = 1e-10
        let (alpha, _) = samme_round(&weights, &[0, 0, 1, 1], &y, 2, 1.0).unwrap();
        assert_abs_diff_eq!(alpha, ((1.0 - 1e-10) / 1e-10f64).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(alpha, 23.026, epsilon = 1e-3);
    }

    #[test]
    fn samme_rejects_unnormalized_weights() {
        let err = samme_round(&[0.9, 0.9], &[0, 1], &[0, 1], 2, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn separable_1d_data_fits_in_one_round() {
        let x: Vec<Vec<f64>> = (-5..=5)
            .filter(|&v| v != 0)
            .map(|v| vec![v as f64])
            .collect();
        let y: Vec<u8> = x.iter().map(|row| (row[0] > 0.0) as u8).collect();
        let model = AdaboostModel::fit(&x, &y, &AdaboostParams::default()).unwrap();
        let errors = model.staged_training_error(&x, &y);
        assert_eq!(errors[0], 0.0);
        for (row, &label) in x.iter().zip(&y) {
            let p = model.predict_proba_row(row);
            assert_eq!((p[1] > p[0]) as u8, label);
        }
    }

    #[test]
    fn unanimous_votes_give_degenerate_probability() {
        let model = AdaboostModel {
            stumps: vec![
                Stump {
                    feature: 0,
                    threshold: 0.0,
                    left_class: 1,
                    right_class: 1,
                    is_split: false,
                    decrease: 0.0,
                },
                Stump {
                    feature: 0,
                    threshold: 0.0,
                    left_class: 1,
                    right_class: 1,
                    is_split: false,
                    decrease: 0.0,
                },
            ],
            alphas: vec![1.0986, 1.0986],
        };
        assert_eq!(model.predict_proba_row(&[0.3]), [0.0, 1.0]);
    }

    #[test]
    fn single_stump_importance_is_one_hot() {
        let x = vec![vec![-1.0, 3.0], vec![-0.5, 1.0], vec![0.5, 2.0], vec![1.0, 0.0]];
        let y = vec![0, 0, 1, 1];
        let model = AdaboostModel {
            stumps: vec![Stump::fit(&x, &y, &[0.25; 4])],
            alphas: vec![1.0],
        };
        assert_eq!(model.gini_importance(2), vec![1.0, 0.0]);
    }
}
