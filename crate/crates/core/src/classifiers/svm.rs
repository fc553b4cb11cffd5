//! Polynomial-kernel SVM: plain SMO dual solver plus Platt-scaled
//! probabilities fitted on an internal 3-fold cross-fit of decision
//! values.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SvmParams;
use crate::{Error, Result};

/// Numerical tolerance of the KKT checks in the solver (pinned).
pub const SMO_TOLERANCE: f64 = 1e-3;

fn poly_kernel(a: &[f64], b: &[f64], gamma: f64, coef0: f64, degree: u32) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (gamma * dot + coef0).powi(degree as i32)
}

/// Dual solution over the full training set.
#[derive(Debug, Clone)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub passes: usize,
}

/// Plain SMO: sweeps examine every point (alternating with non-bound-only
/// sweeps), the partner is picked by the largest |E_i - E_j| with
/// deterministic fallbacks, and the solver stops when a full sweep
/// changes nothing (KKT satisfied within tolerance) or the 10n pass
/// budget runs out.
pub fn smo_solve(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64) -> SmoSolution {
    let n = y.len();
    let max_passes = 10 * n;
    let mut alpha = vec![0.0; n];
    let mut b = 0.0;
    // E_i = f(x_i) - y_i; f starts at zero
    let mut errors: Vec<f64> = y.iter().map(|&yi| -yi).collect();

    let mut examine_all = true;
    let mut passes = 0;
    while passes < max_passes {
        if examine_all {
            // incremental updates drift on badly scaled kernels, and a
            // stale cache manufactures phantom violations forever;
            // recompute exactly before deciding convergence
            refresh_errors(kernel, y, &alpha, b, &mut errors);
        }
        let mut changed = 0;
        for i in 0..n {
            if !examine_all && !(alpha[i] > 0.0 && alpha[i] < c) {
                continue;
            }
            changed += examine(i, kernel, y, c, tol, &mut alpha, &mut b, &mut errors) as usize;
        }
        passes += 1;
        if examine_all {
            if changed == 0 {
                break;
            }
            examine_all = false;
        } else if changed == 0 {
            examine_all = true;
        }
    }
    SmoSolution { alpha, b, passes }
}

fn refresh_errors(kernel: &[Vec<f64>], y: &[f64], alpha: &[f64], b: f64, errors: &mut [f64]) {
    let n = y.len();
    for i in 0..n {
        let mut f = b;
        for j in 0..n {
            if alpha[j] > 0.0 {
                f += alpha[j] * y[j] * kernel[j][i];
            }
        }
        errors[i] = f - y[i];
    }
}

#[allow(clippy::too_many_arguments)]
fn examine(
    i: usize,
    kernel: &[Vec<f64>],
    y: &[f64],
    c: f64,
    tol: f64,
    alpha: &mut [f64],
    b: &mut f64,
    errors: &mut [f64],
) -> bool {
    let n = y.len();
    let r = errors[i] * y[i];
    let violates = (r < -tol && alpha[i] < c) || (r > tol && alpha[i] > 0.0);
    if !violates {
        return false;
    }

    // second-choice heuristic: largest |E_i - E_j| among non-bound points
    let mut best_j = None;
    let mut best_gap = -1.0;
    for j in 0..n {
        if j == i || !(alpha[j] > 0.0 && alpha[j] < c) {
            continue;
        }
        let gap = (errors[i] - errors[j]).abs();
        if gap > best_gap {
            best_gap = gap;
            best_j = Some(j);
        }
    }
    if let Some(j) = best_j {
        if take_step(i, j, kernel, y, c, alpha, b, errors) {
            return true;
        }
    }
    // fall back to every non-bound point, then every point, starting
    // just after i for a deterministic order
    for offset in 1..n {
        let j = (i + offset) % n;
        if alpha[j] > 0.0 && alpha[j] < c && take_step(i, j, kernel, y, c, alpha, b, errors) {
            return true;
        }
    }
    for offset in 1..n {
        let j = (i + offset) % n;
        if take_step(i, j, kernel, y, c, alpha, b, errors) {
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn take_step(
    i: usize,
    j: usize,
    kernel: &[Vec<f64>],
    y: &[f64],
    c: f64,
    alpha: &mut [f64],
    b: &mut f64,
    errors: &mut [f64],
) -> bool {
    if i == j {
        return false;
    }
    let (a_i, a_j) = (alpha[i], alpha[j]);
    let (y_i, y_j) = (y[i], y[j]);
    let (e_i, e_j) = (errors[i], errors[j]);
    let s = y_i * y_j;

    let (low, high) = if (y_i - y_j).abs() > f64::EPSILON {
        ((a_j - a_i).max(0.0), (c + a_j - a_i).min(c))
    } else {
        ((a_i + a_j - c).max(0.0), (a_i + a_j).min(c))
    };
    if low >= high {
        return false;
    }

    let eta = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
    if eta <= 0.0 {
        // no positive curvature along the pair (duplicate points); the
        // plain solver skips rather than probing the segment endpoints
        return false;
    }
    let mut a_j_new = a_j + y_j * (e_i - e_j) / eta;
    a_j_new = a_j_new.clamp(low, high);
    let eps = 1e-6;
    if (a_j_new - a_j).abs() < eps * (a_j_new + a_j + eps) {
        return false;
    }
    let mut a_i_new = a_i + s * (a_j - a_j_new);
    // snap rounding dust to the box
    if a_i_new < 1e-12 {
        a_i_new = 0.0;
    } else if a_i_new > c - 1e-12 {
        a_i_new = c;
    }

    let d_i = a_i_new - a_i;
    let d_j = a_j_new - a_j;
    let b1 = *b - e_i - y_i * d_i * kernel[i][i] - y_j * d_j * kernel[i][j];
    let b2 = *b - e_j - y_i * d_i * kernel[i][j] - y_j * d_j * kernel[j][j];
    let b_new = if a_i_new > 0.0 && a_i_new < c {
        b1
    } else if a_j_new > 0.0 && a_j_new < c {
        b2
    } else {
        (b1 + b2) / 2.0
    };
    let d_b = b_new - *b;

    alpha[i] = a_i_new;
    alpha[j] = a_j_new;
    *b = b_new;
    for (k, e) in errors.iter_mut().enumerate() {
        *e += y_i * d_i * kernel[i][k] + y_j * d_j * kernel[j][k] + d_b;
    }
    true
}

/// Fits Platt's sigmoid `p = 1 / (1 + exp(A*f + B))` to decision values
/// by Newton iterations on the regularized negative log-likelihood with
/// smoothed targets t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2). Stops at
/// gradient norm < 1e-8 or 100 iterations.
pub fn platt_fit(decision_values: &[f64], y: &[u8]) -> Result<(f64, f64)> {
    if decision_values.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: y.len(),
            actual: decision_values.len(),
        });
    }
    let n_pos = y.iter().filter(|&&l| l == 1).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let t_pos = (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0);
    let t_neg = 1.0 / (n_neg as f64 + 2.0);
    let targets: Vec<f64> = y
        .iter()
        .map(|&l| if l == 1 { t_pos } else { t_neg })
        .collect();

    // optimize over f/scale to keep the 2x2 Hessian well conditioned when
    // decision values are huge; A is mapped back at the end
    let scale = decision_values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let decision_values: Vec<f64> = decision_values.iter().map(|v| v / scale).collect();

    let nll = |a: f64, b: f64| -> f64 {
        decision_values
            .iter()
            .zip(&targets)
            .map(|(&f, &t)| {
                let p = sigmoid(-(a * f + b)).clamp(1e-15, 1.0 - 1e-15);
                -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
            })
            .sum()
    };

    let mut a = 0.0;
    let mut b = ((n_neg as f64 + 1.0) / (n_pos as f64 + 1.0)).ln();
    let mut loss = nll(a, b);
    for _ in 0..100 {
        let mut grad_a = 0.0;
        let mut grad_b = 0.0;
        let mut h_aa = 0.0;
        let mut h_ab = 0.0;
        let mut h_bb = 0.0;
        for (&f, &t) in decision_values.iter().zip(&targets) {
            let p = sigmoid(-(a * f + b));
            let d = t - p; // dF/dz at z = a*f + b
            grad_a += d * f;
            grad_b += d;
            let w = (p * (1.0 - p)).max(1e-15);
            h_aa += f * f * w;
            h_ab += f * w;
            h_bb += w;
        }
        if (grad_a * grad_a + grad_b * grad_b).sqrt() < 1e-8 {
            break;
        }
        let det = h_aa * h_bb - h_ab * h_ab;
        let (mut step_a, mut step_b) = if det.abs() > 1e-300 {
            (
                (h_bb * grad_a - h_ab * grad_b) / det,
                (h_aa * grad_b - h_ab * grad_a) / det,
            )
        } else {
            (0.01 * grad_a, 0.01 * grad_b)
        };
        // halve the Newton step until the loss stops increasing
        let mut improved = false;
        for _ in 0..30 {
            let candidate = nll(a - step_a, b - step_b);
            if candidate <= loss + 1e-12 {
                a -= step_a;
                b -= step_b;
                loss = candidate;
                improved = true;
                break;
            }
            step_a /= 2.0;
            step_b /= 2.0;
        }
        if !improved {
            break;
        }
    }
    Ok((a / scale, b))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// Signed labels of the support vectors (-1 genuine, +1 bot).
    pub sv_y: Vec<f64>,
    pub sv_alpha: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub coef0: f64,
    pub degree: u32,
    pub c: f64,
    /// Platt (A, B); `None` when probabilistic approximations are off,
    /// in which case the raw decision value feeds a unit sigmoid.
    pub platt: Option<(f64, f64)>,
}

impl SvmModel {
    pub fn fit(x: &[Vec<f64>], y01: &[u8], params: &SvmParams, seed: u64) -> Result<SvmModel> {
        let d = x[0].len();
        let y: Vec<f64> = y01.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

        // gamma = 1 / (d * var) with var over every standardized entry
        let n_entries = (x.len() * d) as f64;
        let mean: f64 = x.iter().flatten().sum::<f64>() / n_entries;
        let var: f64 = x
            .iter()
            .flatten()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n_entries;
        let gamma = if var > 0.0 { 1.0 / (d as f64 * var) } else { 1.0 / d as f64 };

        let solution = Self::solve_subset(x, &y, gamma, params, &(0..x.len()).collect::<Vec<_>>());

        let mut support_vectors = Vec::new();
        let mut sv_y = Vec::new();
        let mut sv_alpha = Vec::new();
        for (i, &a) in solution.alpha.iter().enumerate() {
            if a > 1e-12 {
                support_vectors.push(x[i].clone());
                sv_y.push(y[i]);
                sv_alpha.push(a);
            }
        }
        let mut model = SvmModel {
            support_vectors,
            sv_y,
            sv_alpha,
            bias: solution.b,
            gamma,
            coef0: params.coef0,
            degree: params.degree,
            c: params.c,
            platt: None,
        };

        if params.probabilistic_approximations {
            model.platt = Some(Self::cross_fit_platt(x, &y, y01, gamma, params, seed)?);
        }
        Ok(model)
    }

    fn solve_subset(
        x: &[Vec<f64>],
        y: &[f64],
        gamma: f64,
        params: &SvmParams,
        indices: &[usize],
    ) -> SmoSolution {
        let kernel: Vec<Vec<f64>> = indices
            .iter()
            .map(|&i| {
                indices
                    .iter()
                    .map(|&j| poly_kernel(&x[i], &x[j], gamma, params.coef0, params.degree))
                    .collect()
            })
            .collect();
        let sub_y: Vec<f64> = indices.iter().map(|&i| y[i]).collect();
        smo_solve(&kernel, &sub_y, params.c, SMO_TOLERANCE)
    }

    /// Out-of-fold decision values from a 3-fold cross-fit feed the
    /// sigmoid so calibration never sees its own training scores.
    fn cross_fit_platt(
        x: &[Vec<f64>],
        y: &[f64],
        y01: &[u8],
        gamma: f64,
        params: &SvmParams,
        seed: u64,
    ) -> Result<(f64, f64)> {
        let n = x.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x504c_4154);
        order.shuffle(&mut rng);

        let folds = 3.min(n);
        let mut decisions = vec![0.0; n];
        for f in 0..folds {
            let held: Vec<usize> = order
                .iter()
                .copied()
                .enumerate()
                .filter(|(pos, _)| pos % folds == f)
                .map(|(_, i)| i)
                .collect();
            let train: Vec<usize> = order
                .iter()
                .copied()
                .enumerate()
                .filter(|(pos, _)| pos % folds != f)
                .map(|(_, i)| i)
                .collect();
            let solution = Self::solve_subset(x, y, gamma, params, &train);
            for &i in &held {
                let mut value = solution.b;
                for (pos, &t) in train.iter().enumerate() {
                    if solution.alpha[pos] > 1e-12 {
                        value += solution.alpha[pos]
                            * y[t]
                            * poly_kernel(&x[t], &x[i], gamma, params.coef0, params.degree);
                    }
                }
                decisions[i] = value;
            }
        }
        platt_fit(&decisions, y01)
    }

    pub fn decision_value(&self, row: &[f64]) -> f64 {
        let mut value = self.bias;
        for ((sv, &yv), &a) in self
            .support_vectors
            .iter()
            .zip(&self.sv_y)
            .zip(&self.sv_alpha)
        {
            value += a * yv * poly_kernel(sv, row, self.gamma, self.coef0, self.degree);
        }
        value
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; 2] {
        let f = self.decision_value(row);
        let (a, b) = self.platt.unwrap_or((-1.0, 0.0));
        let p_bot = sigmoid(-(a * f + b));
        [1.0 - p_bot, p_bot]
    }
}
