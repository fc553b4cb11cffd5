//! Gaussian naive Bayes, the baseline model.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnbModel {
    pub priors: [f64; 2],
    /// Per class, per feature.
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl GnbModel {
    /// Fits class priors and per-feature Gaussians (population variance).
    /// Every variance gets `var_smoothing * max feature variance` added
    /// so zero-variance features stay finite.
    pub fn fit(x: &[Vec<f64>], y: &[u8], var_smoothing: f64) -> GnbModel {
        let d = x[0].len();
        let n = x.len() as f64;

        let mut counts = [0usize; 2];
        let mut sums = [vec![0.0; d], vec![0.0; d]];
        for (row, &label) in x.iter().zip(y) {
            counts[label as usize] += 1;
            for (s, v) in sums[label as usize].iter_mut().zip(row) {
                *s += v;
            }
        }
        let mut means = [vec![0.0; d], vec![0.0; d]];
        for c in 0..2 {
            if counts[c] > 0 {
                for j in 0..d {
                    means[c][j] = sums[c][j] / counts[c] as f64;
                }
            }
        }
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        for (row, &label) in x.iter().zip(y) {
            let c = label as usize;
            for j in 0..d {
                let dv = row[j] - means[c][j];
                variances[c][j] += dv * dv;
            }
        }
        for (class_vars, &count) in variances.iter_mut().zip(&counts) {
            if count > 0 {
                for v in class_vars {
                    *v /= count as f64;
                }
            }
        }

        // smoothing scale: largest per-feature variance over all rows
        let mut grand_mean = vec![0.0; d];
        for row in x {
            for (g, v) in grand_mean.iter_mut().zip(row) {
                *g += v;
            }
        }
        grand_mean.iter_mut().for_each(|g| *g /= n);
        let mut max_var = 0.0f64;
        for j in 0..d {
            let var_j = x
                .iter()
                .map(|row| (row[j] - grand_mean[j]).powi(2))
                .sum::<f64>()
                / n;
            max_var = max_var.max(var_j);
        }
        let eps = if max_var > 0.0 {
            var_smoothing * max_var
        } else {
            var_smoothing
        };
        for c in 0..2 {
            for v in &mut variances[c] {
                *v += eps;
            }
        }

        GnbModel {
            priors: [counts[0] as f64 / n, counts[1] as f64 / n],
            means,
            variances,
        }
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; 2] {
        let mut log_post = [f64::NEG_INFINITY; 2];
        for (c, post) in log_post.iter_mut().enumerate() {
            if self.priors[c] == 0.0 {
                continue;
            }
            let mut lp = self.priors[c].ln();
            for (j, &v) in row.iter().enumerate() {
                let var = self.variances[c][j];
                let diff = v - self.means[c][j];
                lp += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - diff * diff / (2.0 * var);
            }
            *post = lp;
        }
        // normalize through log-sum-exp
        let m = log_post[0].max(log_post[1]);
        let e0 = (log_post[0] - m).exp();
        let e1 = (log_post[1] - m).exp();
        let z = e0 + e1;
        [e0 / z, e1 / z]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_clusters_classify_correctly() {
        let x = vec![
            vec![-2.0],
            vec![-1.8],
            vec![-2.2],
            vec![2.0],
            vec![1.8],
            vec![2.2],
        ];
        let y = vec![0, 0, 0, 1, 1, 1];
        let m = GnbModel::fit(&x, &y, 1e-9);
        assert!(m.predict_proba_row(&[-2.0])[0] > 0.99);
        assert!(m.predict_proba_row(&[2.0])[1] > 0.99);
    }

    #[test]
    fn identical_class_parameters_tie_exactly() {
        // same points in both classes: posteriors are exactly equal
        let x = vec![vec![1.0], vec![2.0], vec![1.0], vec![2.0]];
        let y = vec![0, 0, 1, 1];
        let m = GnbModel::fit(&x, &y, 1e-9);
        let p = m.predict_proba_row(&[1.5]);
        assert_eq!(p[0], p[1]);
    }

    #[test]
    fn single_class_training_is_constant() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = vec![1, 1];
        let m = GnbModel::fit(&x, &y, 1e-9);
        let p = m.predict_proba_row(&[5.0]);
        assert_eq!(p, [0.0, 1.0]);
    }
}
