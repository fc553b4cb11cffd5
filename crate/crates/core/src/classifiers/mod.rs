//! The six classifiers behind one fit / predict / predict_proba /
//! gini_importance contract.
//!
//! Class encoding is fixed everywhere: genuine = 0, bot = 1, and bot is
//! the positive class. Probability rows sum to 1; `predict` is the
//! argmax with ties resolved to genuine.

pub mod adaboost;
pub mod ball_tree;
pub mod forest;
pub mod gnb;
pub mod knn;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use adaboost::{samme_round, AdaboostModel, Stump};
pub use ball_tree::{brute_force_knn, BallTree, Distance};
pub use forest::ForestModel;
pub use gnb::GnbModel;
pub use knn::KnnModel;
pub use svm::{platt_fit, smo_solve, SvmModel, SMO_TOLERANCE};
pub use tree::{Criterion, Splitter, Tree, TreeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnAlgorithm {
    BallTree,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeights {
    Distance,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmKernel {
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostAlgorithm {
    Samme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnbParams {
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams { var_smoothing: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub algorithm: KnnAlgorithm,
    pub leaf_size: usize,
    pub k: usize,
    pub distance: Distance,
    pub weights: KnnWeights,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            algorithm: KnnAlgorithm::BallTree,
            leaf_size: 10,
            k: 5,
            distance: Distance::Manhattan,
            weights: KnnWeights::Distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DtreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Kept for schema fidelity; values outside the legal impurity range
    /// [0, 1] are treated as disabled.
    pub min_impurity_split: Option<f64>,
    pub splitter: Splitter,
    pub min_samples_split: usize,
}

impl Default for DtreeParams {
    fn default() -> Self {
        DtreeParams {
            criterion: Criterion::Gini,
            max_depth: Some(10),
            min_samples_leaf: 2,
            min_impurity_split: Some(3.0),
            splitter: Splitter::Random,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub kernel: SvmKernel,
    pub degree: u32,
    pub coef0: f64,
    /// Solver speedup flag with no observable-output semantics; accepted
    /// and ignored.
    pub shrinking: bool,
    pub probabilistic_approximations: bool,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 3.0,
            kernel: SvmKernel::Polynomial,
            degree: 5,
            coef0: 1.5,
            shrinking: true,
            probabilistic_approximations: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub n_estimators: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            criterion: Criterion::Entropy,
            max_depth: None,
            max_features: Some(5),
            min_samples_split: 3,
            n_estimators: 20,
            min_samples_leaf: 1,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaboostParams {
    pub algorithm: BoostAlgorithm,
    pub learning_rate: f64,
    pub n_estimators: usize,
}

impl Default for AdaboostParams {
    fn default() -> Self {
        AdaboostParams {
            algorithm: BoostAlgorithm::Samme,
            learning_rate: 1.0,
            n_estimators: 50,
        }
    }
}

/// Declarative model choice plus hyperparameters; the JSON keys mirror
/// the tuned-value tables in snake_case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Gnb(GnbParams),
    Knn(KnnParams),
    Dtree(DtreeParams),
    Svm(SvmParams),
    Rforest(ForestParams),
    Adaboost(AdaboostParams),
}

impl ModelSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelSpec::Gnb(_) => "gnb",
            ModelSpec::Knn(_) => "knn",
            ModelSpec::Dtree(_) => "dtree",
            ModelSpec::Svm(_) => "svm",
            ModelSpec::Rforest(_) => "rforest",
            ModelSpec::Adaboost(_) => "adaboost",
        }
    }

    /// The six specs with the tuned defaults, baseline first.
    pub fn all_defaults() -> Vec<ModelSpec> {
        vec![
            ModelSpec::Gnb(GnbParams::default()),
            ModelSpec::Knn(KnnParams::default()),
            ModelSpec::Dtree(DtreeParams::default()),
            ModelSpec::Svm(SvmParams::default()),
            ModelSpec::Rforest(ForestParams::default()),
            ModelSpec::Adaboost(AdaboostParams::default()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            ModelSpec::Gnb(p) => {
                if p.var_smoothing.is_nan() || p.var_smoothing < 0.0 {
                    return fail(format!("var_smoothing must be >= 0, got {}", p.var_smoothing));
                }
            }
            ModelSpec::Knn(p) => {
                if p.k < 1 {
                    return fail("knn k must be >= 1".into());
                }
                if p.leaf_size < 1 {
                    return fail("knn leaf_size must be >= 1".into());
                }
            }
            ModelSpec::Dtree(p) => {
                if p.min_samples_leaf < 1 {
                    return fail("dtree min_samples_leaf must be >= 1".into());
                }
                if p.min_samples_split < 2 {
                    return fail("dtree min_samples_split must be >= 2".into());
                }
                if p.max_depth == Some(0) {
                    return fail("dtree max_depth must be >= 1".into());
                }
            }
            ModelSpec::Svm(p) => {
                if p.c.is_nan() || p.c <= 0.0 {
                    return fail(format!("svm C must be > 0, got {}", p.c));
                }
                if p.degree < 1 {
                    return fail("svm degree must be >= 1".into());
                }
            }
            ModelSpec::Rforest(p) => {
                if p.n_estimators < 1 {
                    return fail("rforest n_estimators must be >= 1".into());
                }
                if p.min_samples_split < 2 {
                    return fail("rforest min_samples_split must be >= 2".into());
                }
                if p.min_samples_leaf < 1 {
                    return fail("rforest min_samples_leaf must be >= 1".into());
                }
                if p.max_features == Some(0) {
                    return fail("rforest max_features must be >= 1".into());
                }
            }
            ModelSpec::Adaboost(p) => {
                if p.n_estimators < 1 {
                    return fail("adaboost n_estimators must be >= 1".into());
                }
                if p.learning_rate.is_nan() || p.learning_rate <= 0.0 {
                    return fail(format!(
                        "adaboost learning_rate must be > 0, got {}",
                        p.learning_rate
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Fitted state, one variant per model kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FittedState {
    Gnb(GnbModel),
    Knn(KnnModel),
    Tree(Tree),
    Svm(SvmModel),
    Forest(ForestModel),
    Adaboost(AdaboostModel),
}

/// An immutable fitted model. Safe to share across threads for
/// concurrent prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub feature_names: Vec<String>,
    /// Fixed class order: [genuine, bot].
    pub classes: [u8; 2],
    pub state: FittedState,
}

/// Fits a model of the requested kind. Deterministic given
/// (spec, x, y, seed). Requires at least two rows; both classes must be
/// present except for GNB and KNN, which degrade to constant predictors.
pub fn fit(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
    feature_names: &[String],
    seed: u64,
) -> Result<TrainedModel> {
    spec.validate()?;
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty training matrix".into()));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 training rows".into()));
    }
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let d = feature_names.len();
    if let Some(bad) = x.iter().find(|row| row.len() != d) {
        return Err(Error::ShapeMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidArgument(format!(
            "labels must be 0 (genuine) or 1 (bot), got {bad}"
        )));
    }
    let has_both = y.contains(&0) && y.contains(&1);
    if !has_both && !matches!(spec, ModelSpec::Gnb(_) | ModelSpec::Knn(_)) {
        return Err(Error::SingleClass);
    }

    use rand::SeedableRng;
    let state = match spec {
        ModelSpec::Gnb(p) => FittedState::Gnb(GnbModel::fit(x, y, p.var_smoothing)),
        ModelSpec::Knn(p) => FittedState::Knn(KnnModel::fit(x, y, p)),
        ModelSpec::Dtree(p) => {
            let config = TreeConfig {
                criterion: p.criterion,
                splitter: p.splitter,
                max_depth: p.max_depth,
                min_samples_leaf: p.min_samples_leaf,
                min_samples_split: p.min_samples_split,
                max_features: None,
                min_impurity_split: p.min_impurity_split,
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            FittedState::Tree(Tree::fit(x, y, &config, &mut rng))
        }
        ModelSpec::Svm(p) => FittedState::Svm(SvmModel::fit(x, y, p, seed)?),
        ModelSpec::Rforest(p) => FittedState::Forest(ForestModel::fit(x, y, p, seed)),
        ModelSpec::Adaboost(p) => FittedState::Adaboost(AdaboostModel::fit(x, y, p)?),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: feature_names.to_vec(),
        classes: [0, 1],
        state,
    })
}

impl TrainedModel {
    fn check_width(&self, x: &[Vec<f64>]) -> Result<()> {
        let d = self.feature_names.len();
        if let Some(bad) = x.iter().find(|row| row.len() != d) {
            return Err(Error::ShapeMismatch {
                expected: d,
                actual: bad.len(),
            });
        }
        Ok(())
    }

    /// Per-row `[p_genuine, p_bot]`; rows sum to 1.
    pub fn predict_proba(&self, x: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        self.check_width(x)?;
        Ok(x.iter().map(|row| self.predict_proba_row(row)).collect())
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> [f64; 2] {
        match &self.state {
            FittedState::Gnb(m) => m.predict_proba_row(row),
            FittedState::Knn(m) => m.predict_proba_row(row),
            FittedState::Tree(m) => m.predict_proba(row),
            FittedState::Svm(m) => m.predict_proba_row(row),
            FittedState::Forest(m) => m.predict_proba_row(row),
            FittedState::Adaboost(m) => m.predict_proba_row(row),
        }
    }

    /// Argmax of `predict_proba`; exact ties go to genuine.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<u8>> {
        Ok(self
            .predict_proba(x)?
            .iter()
            .map(|p| (p[1] > p[0]) as u8)
            .collect())
    }

    /// Normalized impurity-decrease importance for the tree-based kinds.
    pub fn gini_importance(&self) -> Result<Vec<f64>> {
        let d = self.feature_names.len();
        match &self.state {
            FittedState::Tree(m) => Ok(forest::normalize(m.raw_importance.clone())),
            FittedState::Forest(m) => Ok(m.gini_importance()),
            FittedState::Adaboost(m) => Ok(m.gini_importance(d)),
            _ => Err(Error::Unsupported(self.spec.kind_name().to_string())),
        }
    }

    /// Number of base learners for ensemble kinds.
    pub fn n_estimators(&self) -> Option<usize> {
        match &self.state {
            FittedState::Forest(m) => Some(m.trees.len()),
            FittedState::Adaboost(m) => Some(m.stumps.len()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_data() -> (Vec<Vec<f64>>, Vec<u8>, Vec<String>) {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
                vec![sign * (1.0 + (i as f64) * 0.03), (i as f64 * 17.0) % 3.0]
            })
            .collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
        (x, y, vec!["a".into(), "b".into()])
    }

    #[test]
    fn spec_json_keys_mirror_tables() {
        let json = serde_json::to_value(ModelSpec::Knn(KnnParams::default())).unwrap();
        assert_eq!(json["kind"], "knn");
        assert_eq!(json["algorithm"], "ball_tree");
        assert_eq!(json["leaf_size"], 10);
        assert_eq!(json["k"], 5);
        assert_eq!(json["distance"], "manhattan");
        assert_eq!(json["weights"], "distance");

        let json = serde_json::to_value(ModelSpec::Adaboost(AdaboostParams::default())).unwrap();
        assert_eq!(json["kind"], "adaboost");
        assert_eq!(json["algorithm"], "samme");
        assert_eq!(json["learning_rate"], 1.0);
        assert_eq!(json["n_estimators"], 50);

        let parsed: ModelSpec = serde_json::from_str(r#"{"kind":"svm"}"#).unwrap();
        assert_eq!(parsed, ModelSpec::Svm(SvmParams::default()));
    }

    #[test]
    fn forest_has_twenty_trees_by_default() {
        let (x, y, names) = tiny_data();
        let model = fit(&ModelSpec::Rforest(ForestParams::default()), &x, &y, &names, 1).unwrap();
        assert_eq!(model.n_estimators(), Some(20));
    }

    #[test]
    fn knn_training_accuracy_is_one() {
        let (x, y, names) = tiny_data();
        let model = fit(&ModelSpec::Knn(KnnParams::default()), &x, &y, &names, 1).unwrap();
        assert_eq!(model.predict(&x).unwrap(), y);
    }

    #[test]
    fn probability_rows_sum_to_one() {
        let (x, y, names) = tiny_data();
        for spec in ModelSpec::all_defaults() {
            let model = fit(&spec, &x, &y, &names, 5).unwrap();
            for p in model.predict_proba(&x).unwrap() {
                assert!((p[0] + p[1] - 1.0).abs() < 1e-9, "{spec:?}: {p:?}");
                assert!(p[0] >= 0.0 && p[0] <= 1.0);
                assert!(p[1] >= 0.0 && p[1] <= 1.0);
            }
        }
    }

    #[test]
    fn tie_predicts_genuine() {
        // identical class-conditional parameters and equal priors make
        // every posterior an exact tie, which resolves to genuine
        let model = fit(
            &ModelSpec::Gnb(GnbParams::default()),
            &[vec![1.0], vec![2.0], vec![1.0], vec![2.0]],
            &[0, 0, 1, 1],
            &["a".into()],
            1,
        )
        .unwrap();
        let preds = model.predict(&[vec![1.5], vec![0.0]]).unwrap();
        assert_eq!(preds, vec![0, 0]);
    }

    #[test]
    fn feature_count_mismatch_is_rejected() {
        let (x, y, names) = tiny_data();
        let model = fit(&ModelSpec::Gnb(GnbParams::default()), &x, &y, &names, 1).unwrap();
        let err = model.predict(&[vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { expected: 2, actual: 1 }));
    }

    #[test]
    fn importance_unsupported_for_non_tree_models() {
        let (x, y, names) = tiny_data();
        let model = fit(&ModelSpec::Gnb(GnbParams::default()), &x, &y, &names, 1).unwrap();
        assert!(matches!(model.gini_importance(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn illegal_hyperparameters_are_rejected() {
        let (x, y, names) = tiny_data();
        let p = KnnParams { k: 0, ..Default::default() };
        assert!(fit(&ModelSpec::Knn(p), &x, &y, &names, 1).is_err());
        let s = SvmParams { c: 0.0, ..Default::default() };
        assert!(fit(&ModelSpec::Svm(s), &x, &y, &names, 1).is_err());
    }

    #[test]
    fn single_class_rejected_except_gnb_knn() {
        let x = vec![vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![1, 1, 1];
        let names = vec!["a".to_string()];
        assert!(fit(&ModelSpec::Gnb(GnbParams::default()), &x, &y, &names, 1).is_ok());
        assert!(fit(&ModelSpec::Knn(KnnParams::default()), &x, &y, &names, 1).is_ok());
        assert!(matches!(
            fit(&ModelSpec::Adaboost(AdaboostParams::default()), &x, &y, &names, 1),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn trained_model_roundtrips_through_json() {
        let (x, y, names) = tiny_data();
        let model = fit(&ModelSpec::Adaboost(AdaboostParams::default()), &x, &y, &names, 2).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: TrainedModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model.predict(&x).unwrap(), back.predict(&x).unwrap());
    }
}
