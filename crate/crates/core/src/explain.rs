//! Model interpretability: Gini-importance rankings and partial
//! dependence curves.

use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::{Error, Result};

/// Average bot probability as one feature sweeps a grid while every
/// other feature keeps its observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpCurve {
    pub feature_name: String,
    pub grid: Vec<f64>,
    pub mean_p_bot: Vec<f64>,
}

/// Computes the partial dependence of `feature_name` on the bot
/// probability: `grid_size` equally spaced points spanning the feature's
/// observed [min, max]; at each point the feature is overwritten in every
/// row and p_bot averaged.
pub fn partial_dependence(
    model: &TrainedModel,
    x: &[Vec<f64>],
    feature_name: &str,
    grid_size: usize,
) -> Result<PdpCurve> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid_size must be >= 2, got {grid_size}"
        )));
    }
    if x.is_empty() {
        return Err(Error::InvalidArgument("partial dependence needs rows".into()));
    }
    let feature = model
        .feature_names
        .iter()
        .position(|f| f == feature_name)
        .ok_or_else(|| Error::UnknownFeature(feature_name.to_string()))?;

    let min = x.iter().map(|r| r[feature]).fold(f64::INFINITY, f64::min);
    let max = x
        .iter()
        .map(|r| r[feature])
        .fold(f64::NEG_INFINITY, f64::max);
    if min >= max {
        return Err(Error::InvalidArgument(format!(
            "feature `{feature_name}` is constant; the grid cannot ascend"
        )));
    }

    let step = (max - min) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| {
            if i == grid_size - 1 {
                max // exact endpoint, no rounding drift
            } else {
                min + step * i as f64
            }
        })
        .collect();

    let mut perturbed = x.to_vec();
    let mut mean_p_bot = Vec::with_capacity(grid_size);
    for &g in &grid {
        for row in &mut perturbed {
            row[feature] = g;
        }
        let probas = model.predict_proba(&perturbed)?;
        mean_p_bot.push(probas.iter().map(|p| p[1]).sum::<f64>() / probas.len() as f64);
    }

    Ok(PdpCurve {
        feature_name: feature_name.to_string(),
        grid,
        mean_p_bot,
    })
}

/// Per-feature Gini importances, sorted descending (ties by name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub ranking: Vec<(String, f64)>,
}

pub fn importance_report(model: &TrainedModel) -> Result<ImportanceReport> {
    let importances = model.gini_importance()?;
    let mut ranking: Vec<(String, f64)> = model
        .feature_names
        .iter()
        .cloned()
        .zip(importances)
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ImportanceReport { ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, AdaboostParams, ModelSpec};

    fn stump_model() -> TrainedModel {
        // feature 0 separates classes at 0; feature 1 is ignored
        let x = vec![
            vec![-2.0, 0.3],
            vec![-1.0, 0.9],
            vec![1.0, 0.1],
            vec![2.0, 0.7],
        ];
        let y = vec![0, 0, 1, 1];
        let spec = ModelSpec::Adaboost(AdaboostParams {
            n_estimators: 1,
            ..Default::default()
        });
        fit(&spec, &x, &y, &["split_on".into(), "ignored".into()], 3).unwrap()
    }

    #[test]
    fn pdp_of_ignored_feature_is_exactly_constant() {
        let model = stump_model();
        let x = vec![vec![-2.0, 0.3], vec![-1.0, 0.9], vec![1.0, 0.1], vec![2.0, 0.7]];
        let curve = partial_dependence(&model, &x, "ignored", 10).unwrap();
        assert!(curve.mean_p_bot.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn pdp_of_split_feature_is_a_step_at_the_threshold() {
        let model = stump_model();
        let x = vec![vec![-2.0, 0.3], vec![-1.0, 0.9], vec![1.0, 0.1], vec![2.0, 0.7]];
        let curve = partial_dependence(&model, &x, "split_on", 9).unwrap();
        assert_eq!(curve.grid.first(), Some(&-2.0));
        assert_eq!(curve.grid.last(), Some(&2.0));
        // stump threshold is 0: left half predicts genuine, right half bot
        for (g, p) in curve.grid.iter().zip(&curve.mean_p_bot) {
            if *g < 0.0 {
                assert_eq!(*p, 0.0, "grid {g}");
            } else if *g > 0.0 {
                assert_eq!(*p, 1.0, "grid {g}");
            }
        }
    }

    #[test]
    fn pdp_rejects_bad_arguments() {
        let model = stump_model();
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            partial_dependence(&model, &x, "nope", 10),
            Err(Error::UnknownFeature(_))
        ));
        assert!(partial_dependence(&model, &x, "split_on", 1).is_err());
        // constant column cannot produce a strictly ascending grid
        assert!(partial_dependence(&model, &x, "ignored", 10).is_err());
    }

    #[test]
    fn importance_report_is_sorted_and_normalized() {
        let model = stump_model();
        let report = importance_report(&model).unwrap();
        assert_eq!(report.ranking[0].0, "split_on");
        assert_eq!(report.ranking[0].1, 1.0);
        assert_eq!(report.ranking[1].1, 0.0);
        let sum: f64 = report.ranking.iter().map(|(_, v)| v).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}
