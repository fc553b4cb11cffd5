//! Z-standardization, shuffled splitting, and two-phase feature pruning
//! (importance filter first, then pairwise correlation).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ForestParams, ModelSpec};
use crate::features::FeatureMatrix;
use crate::{Error, Result};

/// Per-feature mean and population standard deviation, enough to apply
/// the identical transform to unseen data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl StandardizationParams {
    /// Applies the stored transform; zero-variance columns map to zeros.
    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        if matrix.n_features() != self.means.len() {
            return Err(Error::ShapeMismatch {
                expected: self.means.len(),
                actual: matrix.n_features(),
            });
        }
        let mut out = matrix.clone();
        for row in &mut out.rows {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if self.stds[j] > 0.0 {
                    (*v - self.means[j]) / self.stds[j]
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }
}

/// Standardizes every column to mean 0, population std 1 (constant
/// columns become all zeros) and returns the parameters used.
pub fn z_standardize(matrix: &FeatureMatrix) -> Result<(FeatureMatrix, StandardizationParams)> {
    if matrix.n_rows() == 0 {
        return Err(Error::InvalidArgument("cannot standardize an empty matrix".into()));
    }
    let n = matrix.n_rows() as f64;
    let d = matrix.n_features();
    let mut means = vec![0.0; d];
    for row in &matrix.rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![0.0; d];
    for row in &matrix.rows {
        for (j, v) in row.iter().enumerate() {
            let diff = v - means[j];
            stds[j] += diff * diff;
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
    }
    let params = StandardizationParams { means, stds };
    Ok((params.apply(matrix)?, params))
}

/// Pearson correlation coefficient; 0 when either input is constant.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("correlation needs at least 2 points".into()));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Shuffled row indices split into (train, test) with
/// |test| = round(n * test_fraction); each side is in original row order.
pub fn split_indices(
    n: usize,
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::SampleTooSmall { need: 2, got: n });
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Splits a matrix into (train, test) by [`split_indices`].
pub fn train_test_split(
    matrix: &FeatureMatrix,
    test_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let (train_idx, test_idx) = split_indices(matrix.n_rows(), test_fraction, seed)?;
    Ok((matrix.take_rows(&train_idx), matrix.take_rows(&test_idx)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedDrop {
    pub dropped: String,
    pub kept_partner: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnimportantDrop {
    pub name: String,
    pub importance: f64,
}

/// Outcome of the two pruning phases. `kept` plus the two drop lists is
/// exactly the input feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub kept: Vec<String>,
    pub dropped_correlated: Vec<CorrelatedDrop>,
    pub dropped_unimportant: Vec<UnimportantDrop>,
}

impl FeatureSelection {
    pub fn apply(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        matrix.select_columns(&self.kept)
    }
}

/// Two-phase pruning. Phase 1 fits a reference random forest (tuned
/// forest settings) and drops features whose Gini importance falls below
/// `importance_threshold`. Phase 2 scans surviving pairs in column order
/// and, whenever |r| >= corr_threshold, drops the later-listed member.
pub fn prune_features(
    matrix: &FeatureMatrix,
    corr_threshold: f64,
    importance_threshold: f64,
    seed: u64,
) -> Result<FeatureSelection> {
    if !corr_threshold.is_finite() || corr_threshold < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "corr_threshold must be finite and >= 0, got {corr_threshold}"
        )));
    }
    if !(0.0..=1.0).contains(&importance_threshold) {
        return Err(Error::InvalidArgument(format!(
            "importance_threshold must be in [0, 1], got {importance_threshold}"
        )));
    }
    if matrix.n_features() < 2 {
        return Err(Error::InvalidArgument("pruning needs at least 2 features".into()));
    }

    let y = matrix.binary_labels()?;
    let reference = classifiers::fit(
        &ModelSpec::Rforest(ForestParams::default()),
        &matrix.rows,
        &y,
        &matrix.feature_names,
        seed,
    )?;
    let importances = reference.gini_importance()?;

    let mut kept: Vec<usize> = Vec::new();
    let mut dropped_unimportant = Vec::new();
    for (j, name) in matrix.feature_names.iter().enumerate() {
        if importances[j] < importance_threshold {
            dropped_unimportant.push(UnimportantDrop {
                name: name.clone(),
                importance: importances[j],
            });
        } else {
            kept.push(j);
        }
    }

    let mut dropped_correlated = Vec::new();
    let mut survivors: Vec<usize> = Vec::new();
    for (pos, &j) in kept.iter().enumerate() {
        let mut drop_reason = None;
        for &i in &kept[..pos] {
            if !survivors.contains(&i) {
                continue;
            }
            let r = pearson_correlation(&matrix.column(i), &matrix.column(j))?;
            if r.abs() >= corr_threshold {
                drop_reason = Some(CorrelatedDrop {
                    dropped: matrix.feature_names[j].clone(),
                    kept_partner: matrix.feature_names[i].clone(),
                    r,
                });
                break;
            }
        }
        match drop_reason {
            Some(reason) => dropped_correlated.push(reason),
            None => survivors.push(j),
        }
    }

    Ok(FeatureSelection {
        kept: survivors
            .iter()
            .map(|&j| matrix.feature_names[j].clone())
            .collect(),
        dropped_correlated,
        dropped_unimportant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::account::Label;
    use approx::assert_abs_diff_eq;

    fn matrix(rows: Vec<Vec<f64>>, labels: Vec<Label>) -> FeatureMatrix {
        let d = rows.first().map_or(0, Vec::len);
        FeatureMatrix {
            feature_names: (0..d).map(|j| format!("f{j}")).collect(),
            ids: (0..rows.len()).map(|i| format!("r{i}")).collect(),
            providers: vec![None; rows.len()],
            labels,
            rows,
        }
    }

    #[test]
    fn standardize_matches_hand_values() {
        let m = matrix(
            vec![vec![1.0], vec![2.0], vec![3.0]],
            vec![Label::Genuine; 3],
        );
        let (z, params) = z_standardize(&m).unwrap();
        assert_abs_diff_eq!(z.rows[0][0], -1.22474, epsilon = 1e-5);
        assert_abs_diff_eq!(z.rows[1][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.rows[2][0], 1.22474, epsilon = 1e-5);
        assert_eq!(params.means, vec![2.0]);

        // applying the saved params reproduces the standardized matrix
        let again = params.apply(&m).unwrap();
        assert_eq!(again.rows, z.rows);
    }

    #[test]
    fn constant_column_maps_to_zeros() {
        let m = matrix(vec![vec![5.0], vec![5.0], vec![5.0]], vec![Label::Genuine; 3]);
        let (z, _) = z_standardize(&m).unwrap();
        assert!(z.rows.iter().all(|r| r[0] == 0.0));
    }

    #[test]
    fn standardize_is_idempotent_within_tolerance() {
        let m = matrix(
            vec![vec![-1.5], vec![0.5], vec![1.0]],
            vec![Label::Genuine; 3],
        );
        let (z1, _) = z_standardize(&m).unwrap();
        let (z2, _) = z_standardize(&z1).unwrap();
        for (a, b) in z1.rows.iter().zip(&z2.rows) {
            assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn standardize_rejects_empty() {
        let m = matrix(vec![], vec![]);
        assert!(z_standardize(&m).is_err());
    }

    #[test]
    fn pearson_known_values() {
        assert_abs_diff_eq!(
            pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson_correlation(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pearson_constant_input_is_zero() {
        assert_eq!(pearson_correlation(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn pearson_length_mismatch_errors() {
        assert!(pearson_correlation(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let (train, test) = split_indices(2000, 0.3, 42).unwrap();
        assert_eq!(train.len(), 1400);
        assert_eq!(test.len(), 600);
        let (train2, test2) = split_indices(2000, 0.3, 42).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);

        let (train3, test3) = split_indices(10, 0.5, 7).unwrap();
        assert_eq!(train3.len(), 5);
        assert_eq!(test3.len(), 5);
        let mut all: Vec<usize> = train3.iter().chain(&test3).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_bad_fraction() {
        assert!(split_indices(10, 0.0, 1).is_err());
        assert!(split_indices(10, 1.0, 1).is_err());
    }

    fn separable_matrix() -> FeatureMatrix {
        // f0 separates classes; f1 duplicates f0; f2 is deterministic noise
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..60 {
            let v = if i % 2 == 0 { -1.0 } else { 1.0 } * (1.0 + (i as f64) * 0.01);
            let noise = (((i * 2654435761_usize) % 97) as f64) / 97.0 - 0.5;
            rows.push(vec![v, v, noise]);
            labels.push(if i % 2 == 0 { Label::Genuine } else { Label::Bot });
        }
        matrix(rows, labels)
    }

    #[test]
    fn duplicate_column_drops_exactly_one_as_correlated() {
        let m = separable_matrix();
        let sel = prune_features(&m, 0.95, 0.0, 9).unwrap();
        assert!(sel.dropped_unimportant.is_empty());
        assert_eq!(sel.dropped_correlated.len(), 1);
        assert_eq!(sel.dropped_correlated[0].dropped, "f1");
        assert_eq!(sel.dropped_correlated[0].kept_partner, "f0");
        assert_abs_diff_eq!(sel.dropped_correlated[0].r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noise_feature_is_dropped_by_importance_phase() {
        let m = separable_matrix();
        let sel = prune_features(&m, 2.0, 0.01, 9).unwrap();
        assert!(sel
            .dropped_unimportant
            .iter()
            .any(|d| d.name == "f2"), "{sel:?}");
        assert!(sel.kept.contains(&"f0".to_string()));
    }

    #[test]
    fn unreachable_thresholds_drop_nothing() {
        let m = separable_matrix();
        let sel = prune_features(&m, 1.01, 0.0, 9).unwrap();
        assert_eq!(sel.kept, vec!["f0", "f1", "f2"]);
        assert!(sel.dropped_correlated.is_empty());
        assert!(sel.dropped_unimportant.is_empty());
    }

    #[test]
    fn selection_partitions_the_feature_set() {
        let m = separable_matrix();
        let sel = prune_features(&m, 0.9, 0.05, 9).unwrap();
        let mut names: Vec<String> = sel.kept.clone();
        names.extend(sel.dropped_correlated.iter().map(|d| d.dropped.clone()));
        names.extend(sel.dropped_unimportant.iter().map(|d| d.name.clone()));
        names.sort();
        let mut expect = m.feature_names.clone();
        expect.sort();
        assert_eq!(names, expect);
    }

    #[test]
    fn invalid_thresholds_are_rejected() {
        let m = separable_matrix();
        assert!(prune_features(&m, -0.1, 0.0, 9).is_err());
        assert!(prune_features(&m, 0.9, 1.5, 9).is_err());
        assert!(prune_features(&m, f64::NAN, 0.0, 9).is_err());
    }
}
