//! Metrics and the statistical evaluation suite: k-fold cross-validation,
//! the repeated baseline-comparison experiment with one-tailed z-tests,
//! confidence intervals, grid search, leave-one-provider-out evaluation,
//! and probability ranking.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::BTreeMap;

/// Standard normal CDF through `erfc`; accurate to well under 1e-12
/// everywhere (statrs's own cdf only reaches ~1e-11).
fn phi(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
fn phi_inverse(p: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(p)
}

use crate::account::Label;
use crate::classifiers::{self, ModelSpec, TrainedModel};
use crate::features::FeatureMatrix;
use crate::{Error, Result};

/// Classification metrics with bot as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: Option<f64>,
}

/// Standard confusion-matrix metrics; any zero denominator yields 0 for
/// the affected metric instead of NaN.
pub fn confusion_metrics(y_true: &[u8], y_pred: &[u8]) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::ShapeMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one row".into()));
    }
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (0, 0) => tn += 1,
            (1, 0) => fn_ += 1,
            _ => {
                return Err(Error::InvalidArgument(
                    "labels must be 0 (genuine) or 1 (bot)".into(),
                ))
            }
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let accuracy = ratio(tp + tn, tp + tn + fp + fn_);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
        roc_auc: None,
    })
}

/// Rank-statistic (Mann-Whitney) area under the ROC curve; ties
/// contribute one half. Requires both classes.
pub fn roc_auc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::ShapeMismatch {
            expected: y_true.len(),
            actual: scores.len(),
        });
    }
    let n_pos = y_true.iter().filter(|&&l| l == 1).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // average 1-based ranks across tied scores
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        let avg_rank = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            if y_true[i] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        start = end + 1;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Per-fold metrics plus the unweighted fold mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<Metrics>,
    pub mean: Metrics,
    /// Fold index assigned to each input row.
    pub fold_of_row: Vec<usize>,
}

/// K-fold cross-validation: rows are shuffled under the seed before
/// folding, fold sizes differ by at most one, and every fold serves as
/// validation exactly once. Per-fold model seeds are `seed ^ fold`.
pub fn kfold_cv(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    let n = x.len();
    if n < k {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {n} rows")));
    }
    if y.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            actual: y.len(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = n / k;
    let extra = n % k;
    let feature_names: Vec<String> = (0..x[0].len()).map(|j| format!("f{j}")).collect();

    let mut fold_of_row = vec![0usize; n];
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let val_idx = &order[start..start + size];
        start += size;
        for &i in val_idx {
            fold_of_row[i] = fold;
        }
        let train_idx: Vec<usize> = order
            .iter()
            .copied()
            .filter(|i| !val_idx.contains(i))
            .collect();

        let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| x[i].clone()).collect();
        let train_y: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
        let val_x: Vec<Vec<f64>> = val_idx.iter().map(|&i| x[i].clone()).collect();
        let val_y: Vec<u8> = val_idx.iter().map(|&i| y[i]).collect();

        let model = classifiers::fit(spec, &train_x, &train_y, &feature_names, seed ^ fold as u64)?;
        let pred = model.predict(&val_x)?;
        folds.push(confusion_metrics(&val_y, &pred)?);
    }

    let k_f = k as f64;
    let mean = Metrics {
        accuracy: folds.iter().map(|m| m.accuracy).sum::<f64>() / k_f,
        precision: folds.iter().map(|m| m.precision).sum::<f64>() / k_f,
        recall: folds.iter().map(|m| m.recall).sum::<f64>() / k_f,
        f1: folds.iter().map(|m| m.f1).sum::<f64>() / k_f,
        roc_auc: None,
    };
    Ok(CvReport {
        folds,
        mean,
        fold_of_row,
    })
}

/// One-tailed z-test of the alternative "mean(b) > mean(a)" using sample
/// variances: z = (mean_b - mean_a) / sqrt(s_a^2/n_a + s_b^2/n_b),
/// p = 1 - Phi(z). Both samples need at least 30 values.
pub fn one_tailed_z_test(sample_a: &[f64], sample_b: &[f64]) -> Result<f64> {
    for s in [sample_a, sample_b] {
        if s.len() < 30 {
            return Err(Error::SampleTooSmall {
                need: 30,
                got: s.len(),
            });
        }
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let var = |s: &[f64], m: f64| {
        s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (s.len() as f64 - 1.0)
    };
    let (ma, mb) = (mean(sample_a), mean(sample_b));
    let denom = (var(sample_a, ma) / sample_a.len() as f64
        + var(sample_b, mb) / sample_b.len() as f64)
        .sqrt();
    if denom == 0.0 {
        return Ok(match mb.partial_cmp(&ma) {
            Some(std::cmp::Ordering::Greater) => 0.0,
            Some(std::cmp::Ordering::Less) => 1.0,
            _ => 0.5,
        });
    }
    let z = (mb - ma) / denom;
    Ok(1.0 - phi(z))
}

/// Variance convention for [`confidence_interval_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceConvention {
    /// n - 1 denominator (default for reported intervals).
    Sample,
    /// n denominator; makes the 1/sqrt(n) half-width scaling exact under
    /// sample repetition.
    Population,
}

/// `(center, half_width)` where center is the mean and half_width is
/// z* . s / sqrt(n) with z* = Phi^-1((1 + level) / 2). Requires at least
/// 30 observations; see [`confidence_interval_with`] to waive the guard.
pub fn confidence_interval(sample: &[f64], level: f64) -> Result<(f64, f64)> {
    confidence_interval_with(sample, level, VarianceConvention::Sample, true)
}

pub fn confidence_interval_with(
    sample: &[f64],
    level: f64,
    convention: VarianceConvention,
    enforce_min_size: bool,
) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let min = if enforce_min_size { 30 } else { 2 };
    if sample.len() < min {
        return Err(Error::SampleTooSmall {
            need: min,
            got: sample.len(),
        });
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let ss: f64 = sample.iter().map(|v| (v - mean) * (v - mean)).sum();
    let s = match convention {
        VarianceConvention::Sample => (ss / (n - 1.0)).sqrt(),
        VarianceConvention::Population => (ss / n).sqrt(),
    };
    let z_star = phi_inverse((1.0 + level) / 2.0);
    Ok((mean, z_star * s / n.sqrt()))
}

/// Per-repetition metric samples for one experiment arm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSamples {
    pub accuracy: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
}

impl MetricSamples {
    fn push(&mut self, m: &Metrics) {
        self.accuracy.push(m.accuracy);
        self.precision.push(m.precision);
        self.recall.push(m.recall);
        self.f1.push(m.f1);
    }

    pub fn by_name(&self, name: &str) -> &[f64] {
        match name {
            "accuracy" => &self.accuracy,
            "precision" => &self.precision,
            "recall" => &self.recall,
            _ => &self.f1,
        }
    }
}

/// One row of the baseline-comparison summary: mean +/- 2 std per arm
/// and the one-tailed p-value for "all features > basic features".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub basic_mean: f64,
    pub basic_band: f64,
    pub all_mean: f64,
    pub all_band: f64,
    /// `None` when too few repetitions support the z-test.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub repetitions: usize,
    pub shuffles_per_rep: usize,
    pub k: usize,
    pub basic: MetricSamples,
    pub all: MetricSamples,
    pub summary: Vec<MetricComparison>,
}

pub const COMPARED_METRICS: [&str; 4] = ["accuracy", "precision", "recall", "f1"];

const Z_TEST_SAMPLE_SIZE: usize = 40;

/// The repeated significance experiment: per repetition the rows are
/// shuffled `shuffles_per_rep` times, the naive-Bayes baseline is
/// cross-validated on the basic-features arm and on the all-features arm
/// over the same shuffled order, and the aggregate metrics are recorded.
/// The summary reports mean +/- 2 std per arm and a one-tailed z-test on
/// 40 values drawn uniformly from each arm's repetition results.
pub fn repeated_experiment(
    x_basic: &[Vec<f64>],
    x_all: &[Vec<f64>],
    y: &[u8],
    repetitions: usize,
    shuffles_per_rep: usize,
    k: usize,
    seed: u64,
) -> Result<ComparisonReport> {
    if repetitions < 2 {
        return Err(Error::InvalidArgument(format!(
            "repetitions must be >= 2, got {repetitions}"
        )));
    }
    if x_basic.len() != y.len() || x_all.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: y.len(),
            actual: x_basic.len().min(x_all.len()),
        });
    }
    let baseline = ModelSpec::Gnb(Default::default());

    let mut basic = MetricSamples::default();
    let mut all = MetricSamples::default();
    for rep in 0..repetitions {
        let rep_seed = seed ^ rep as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        let mut order: Vec<usize> = (0..y.len()).collect();
        for _ in 0..shuffles_per_rep {
            order.shuffle(&mut rng);
        }
        let shuffled_y: Vec<u8> = order.iter().map(|&i| y[i]).collect();
        for (matrix, samples) in [(x_basic, &mut basic), (x_all, &mut all)] {
            let shuffled_x: Vec<Vec<f64>> = order.iter().map(|&i| matrix[i].clone()).collect();
            let report = kfold_cv(&baseline, &shuffled_x, &shuffled_y, k, rep_seed)?;
            samples.push(&report.mean);
        }
    }

    let two_std = |s: &[f64]| {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        2.0 * (s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;

    let mut sample_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a_7e57);
    let mut summary = Vec::new();
    for metric in COMPARED_METRICS {
        let a = basic.by_name(metric);
        let b = all.by_name(metric);
        let p_value = if repetitions >= Z_TEST_SAMPLE_SIZE {
            let draw = |rng: &mut ChaCha8Rng, from: &[f64]| -> Vec<f64> {
                let idx = rand::seq::index::sample(rng, from.len(), Z_TEST_SAMPLE_SIZE);
                idx.iter().map(|i| from[i]).collect()
            };
            let sub_a = draw(&mut sample_rng, a);
            let sub_b = draw(&mut sample_rng, b);
            Some(one_tailed_z_test(&sub_a, &sub_b)?)
        } else {
            None
        };
        summary.push(MetricComparison {
            metric: metric.to_string(),
            basic_mean: mean(a),
            basic_band: two_std(a),
            all_mean: mean(b),
            all_band: two_std(b),
            p_value,
        });
    }

    Ok(ComparisonReport {
        repetitions,
        shuffles_per_rep,
        k,
        basic,
        all,
        summary,
    })
}

/// Evaluates every spec in the grid by k-fold CV and returns the one with
/// the highest mean F1 (first in grid order on ties) plus its report.
pub fn grid_search(
    grid: &[ModelSpec],
    x: &[Vec<f64>],
    y: &[u8],
    k: usize,
    seed: u64,
) -> Result<(ModelSpec, CvReport)> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty spec grid".into()));
    }
    let kind = std::mem::discriminant(&grid[0]);
    if grid.iter().any(|s| std::mem::discriminant(s) != kind) {
        return Err(Error::InvalidArgument(
            "grid must contain specs of a single model kind".into(),
        ));
    }
    let mut best: Option<(usize, CvReport)> = None;
    for (i, spec) in grid.iter().enumerate() {
        let report = kfold_cv(spec, x, y, k, seed)?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.mean.f1 > b.mean.f1)
        {
            best = Some((i, report));
        }
    }
    let (i, report) = best.expect("non-empty grid");
    Ok((grid[i].clone(), report))
}

/// One leave-one-provider-out iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutIteration {
    pub provider: String,
    pub metrics: Metrics,
    pub test_ids: Vec<String>,
    pub train_ids: Vec<String>,
}

/// Provider-holdout evaluation: one iteration per distinct bot provider.
/// The iteration's test set is that provider's bots plus an equal number
/// of genuine accounts (re-sampled with replacement when fewer genuine
/// rows exist); the model is refit on everything else.
pub fn provider_holdout(
    matrix: &FeatureMatrix,
    spec: &ModelSpec,
    seed: u64,
) -> Result<Vec<HoldoutIteration>> {
    let mut by_provider: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut genuine_rows: Vec<usize> = Vec::new();
    let mut labeled_rows: Vec<usize> = Vec::new();
    for i in 0..matrix.n_rows() {
        match matrix.labels[i] {
            Label::Bot => {
                labeled_rows.push(i);
                if let Some(p) = matrix.providers[i].as_deref().filter(|p| !p.is_empty()) {
                    by_provider.entry(p).or_default().push(i);
                }
            }
            Label::Genuine => {
                labeled_rows.push(i);
                genuine_rows.push(i);
            }
            Label::Unknown => {}
        }
    }
    if by_provider.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "provider holdout needs >= 2 distinct bot providers, found {}",
            by_provider.len()
        )));
    }

    let mut iterations = Vec::new();
    for (iter, (provider, bot_rows)) in by_provider.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ iter as u64);
        let n_b = bot_rows.len();
        let genuine_sample: Vec<usize> = if genuine_rows.len() >= n_b {
            genuine_rows
                .choose_multiple(&mut rng, n_b)
                .copied()
                .collect()
        } else {
            (0..n_b)
                .map(|_| genuine_rows[rng.gen_range(0..genuine_rows.len())])
                .collect()
        };

        let mut test_rows: Vec<usize> = bot_rows.clone();
        test_rows.extend(&genuine_sample);
        let test_set: std::collections::HashSet<usize> = test_rows.iter().copied().collect();
        let train_rows: Vec<usize> = labeled_rows
            .iter()
            .copied()
            .filter(|i| !test_set.contains(i))
            .collect();

        let train_x: Vec<Vec<f64>> = train_rows.iter().map(|&i| matrix.rows[i].clone()).collect();
        let train_y: Vec<u8> = train_rows
            .iter()
            .map(|&i| matrix.labels[i].as_binary().expect("labeled"))
            .collect();
        let test_x: Vec<Vec<f64>> = test_rows.iter().map(|&i| matrix.rows[i].clone()).collect();
        let test_y: Vec<u8> = test_rows
            .iter()
            .map(|&i| matrix.labels[i].as_binary().expect("labeled"))
            .collect();

        let model = classifiers::fit(
            spec,
            &train_x,
            &train_y,
            &matrix.feature_names,
            seed ^ iter as u64,
        )?;
        let pred = model.predict(&test_x)?;
        iterations.push(HoldoutIteration {
            provider: provider.to_string(),
            metrics: confusion_metrics(&test_y, &pred)?,
            test_ids: test_rows.iter().map(|&i| matrix.ids[i].clone()).collect(),
            train_ids: train_rows.iter().map(|&i| matrix.ids[i].clone()).collect(),
        });
    }
    Ok(iterations)
}

/// Scores every row and returns the `top_n` accounts by descending bot
/// probability, ties broken by ascending id.
pub fn rank_by_bot_probability(
    model: &TrainedModel,
    matrix: &FeatureMatrix,
    top_n: usize,
) -> Result<Vec<(String, f64)>> {
    let probas = model.predict_proba(&matrix.rows)?;
    let mut ranked: Vec<(String, f64)> = matrix
        .ids
        .iter()
        .cloned()
        .zip(probas.iter().map(|p| p[1]))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    Ok(ranked)
}
