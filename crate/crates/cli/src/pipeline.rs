//! Stage-by-stage pipeline orchestration. Each stage is a function of
//! the resolved config (and earlier stage products) so the standalone
//! subcommands and the full `pipeline` command produce byte-identical
//! artifacts for the same config and seed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use botdetect::account::{load_dataset, Dataset, Format, Label};
use botdetect::classifiers::{self, ModelSpec, TrainedModel};
use botdetect::evaluation::{
    self, confidence_interval_with, provider_holdout, rank_by_bot_probability,
    repeated_experiment, roc_auc, ComparisonReport, VarianceConvention,
};
use botdetect::explain::{importance_report, partial_dependence, PdpCurve};
use botdetect::features::FeatureMatrix;
use botdetect::preprocess::{
    prune_features, split_indices, z_standardize, FeatureSelection, StandardizationParams,
};

use crate::config::PipelineConfig;
use crate::reports::*;
use crate::CliError;

/// Everything the supervised stages work on, derived once per run.
pub struct Prepared {
    pub dataset: Dataset,
    /// All rows, standardized (unlabeled rows included).
    pub standardized: FeatureMatrix,
    pub params: StandardizationParams,
    /// Standardized rows with a bot/genuine label.
    pub labeled: FeatureMatrix,
    pub labels: Vec<u8>,
}

pub fn load_or_generate(config: &PipelineConfig) -> Result<Dataset, CliError> {
    config.validate()?;
    match &config.dataset_path {
        Some(path) => load_dataset(path, Format::Jsonl).map_err(CliError::data_from),
        None => {
            botdetect::synth::generate_dataset(&config.synth_config()).map_err(CliError::config_from)
        }
    }
}

pub fn prepare(config: &PipelineConfig) -> Result<Prepared, CliError> {
    let dataset = load_or_generate(config)?;
    let matrix = FeatureMatrix::from_dataset(&dataset);
    if matrix.n_rows() == 0 {
        return Err(CliError::data("dataset contains no records".into()));
    }
    let (standardized, params) = z_standardize(&matrix).map_err(CliError::data_from)?;
    let labeled_idx: Vec<usize> = (0..standardized.n_rows())
        .filter(|&i| standardized.labels[i] != Label::Unknown)
        .collect();
    let labeled = standardized.take_rows(&labeled_idx);
    let labels = labeled.binary_labels().map_err(CliError::data_from)?;
    Ok(Prepared {
        dataset,
        standardized,
        params,
        labeled,
        labels,
    })
}

pub fn stage_selection(
    prepared: &Prepared,
    config: &PipelineConfig,
) -> Result<FeatureSelection, CliError> {
    if !prepared.labels.contains(&0) || !prepared.labels.contains(&1) {
        return Err(CliError::data(
            "feature pruning needs both bot and genuine rows".into(),
        ));
    }
    prune_features(
        &prepared.labeled,
        config.corr_threshold,
        config.importance_threshold,
        config.seed,
    )
    .map_err(CliError::runtime_from)
}

pub fn stage_comparison(
    prepared: &Prepared,
    config: &PipelineConfig,
) -> Result<ComparisonReport, CliError> {
    let basic = prepared.labeled.basic_view().map_err(CliError::runtime_from)?;
    repeated_experiment(
        &basic.rows,
        &prepared.labeled.rows,
        &prepared.labels,
        config.repetitions,
        config.shuffles_per_rep,
        config.k,
        config.seed,
    )
    .map_err(CliError::runtime_from)
}

/// The model driving the single-model analyses (confidence, importance,
/// PDPs, holdout, ranking): the boosted ensemble when configured, else
/// the first configured spec.
pub fn analysis_spec(config: &PipelineConfig) -> ModelSpec {
    config
        .models
        .iter()
        .find(|s| matches!(s, ModelSpec::Adaboost(_)))
        .unwrap_or(&config.models[0])
        .clone()
}

pub struct TrainTest {
    pub train: FeatureMatrix,
    pub train_y: Vec<u8>,
    pub test: FeatureMatrix,
    pub test_y: Vec<u8>,
}

pub fn stage_split(
    pruned: &FeatureMatrix,
    y: &[u8],
    config: &PipelineConfig,
) -> Result<TrainTest, CliError> {
    let (train_idx, test_idx) =
        split_indices(pruned.n_rows(), config.test_fraction, config.seed)
            .map_err(CliError::runtime_from)?;
    Ok(TrainTest {
        train: pruned.take_rows(&train_idx),
        train_y: train_idx.iter().map(|&i| y[i]).collect(),
        test: pruned.take_rows(&test_idx),
        test_y: test_idx.iter().map(|&i| y[i]).collect(),
    })
}

/// Cross-validates every configured model on the training split and
/// scores ROC AUC on the held-out test split.
pub fn stage_model_cv(
    split: &TrainTest,
    config: &PipelineConfig,
    header: ReportHeader,
) -> Result<ModelCvReport, CliError> {
    let mut rows = Vec::new();
    for spec in &config.models {
        let report = evaluation::kfold_cv(
            spec,
            &split.train.rows,
            &split.train_y,
            config.k,
            config.seed,
        )
        .map_err(CliError::runtime_from)?;
        let model = classifiers::fit(
            spec,
            &split.train.rows,
            &split.train_y,
            &split.train.feature_names,
            config.seed,
        )
        .map_err(CliError::runtime_from)?;
        let scores: Vec<f64> = model
            .predict_proba(&split.test.rows)
            .map_err(CliError::runtime_from)?
            .iter()
            .map(|p| p[1])
            .collect();
        let auc = roc_auc(&split.test_y, &scores).map_err(CliError::runtime_from)?;
        rows.push(ModelCvRow {
            model: spec.kind_name().to_string(),
            accuracy: report.mean.accuracy,
            precision: report.mean.precision,
            recall: report.mean.recall,
            f1: report.mean.f1,
            roc_auc: Some(auc),
        });
    }
    Ok(ModelCvReport::new(header, rows))
}

pub fn stage_confidence(
    split: &TrainTest,
    model: &TrainedModel,
    config: &PipelineConfig,
    header: ReportHeader,
) -> Result<ConfidenceReport, CliError> {
    let probas = model
        .predict_proba(&split.test.rows)
        .map_err(CliError::runtime_from)?;
    let mut intervals = Vec::new();
    for (class_name, class_value) in [("bots", 1u8), ("genuine", 0u8)] {
        let sample: Vec<f64> = probas
            .iter()
            .zip(&split.test_y)
            .filter(|(_, &y)| y == class_value)
            .map(|(p, _)| p[1])
            .collect();
        if sample.len() < 2 {
            return Err(CliError::data(format!(
                "confidence analysis needs at least 2 {class_name} rows in the test split"
            )));
        }
        let (center, half_width) = confidence_interval_with(
            &sample,
            config.confidence_level,
            VarianceConvention::Sample,
            false,
        )
        .map_err(CliError::runtime_from)?;
        intervals.push(ClassInterval {
            class: class_name.to_string(),
            center,
            half_width,
            n: sample.len(),
            size_guard_met: sample.len() >= 30,
        });
    }
    Ok(ConfidenceReport {
        header,
        level: config.confidence_level,
        intervals,
    })
}

pub fn stage_explain(
    pruned: &FeatureMatrix,
    model: &TrainedModel,
    config: &PipelineConfig,
    header: ReportHeader,
) -> Result<ExplainReport, CliError> {
    let importance = importance_report(model).map_err(CliError::runtime_from)?;
    let mut pdp: Vec<PdpCurve> = Vec::new();
    for name in &pruned.feature_names {
        pdp.push(
            partial_dependence(model, &pruned.rows, name, config.pdp_grid_size)
                .map_err(CliError::runtime_from)?,
        );
    }
    Ok(ExplainReport {
        header,
        model: model.spec.kind_name().to_string(),
        importance: importance.ranking,
        pdp,
    })
}

pub fn stage_holdout(
    pruned: &FeatureMatrix,
    spec: &ModelSpec,
    config: &PipelineConfig,
    header: ReportHeader,
) -> Result<HoldoutReport, CliError> {
    let iterations = provider_holdout(pruned, spec, config.seed).map_err(CliError::data_from)?;
    Ok(HoldoutReport {
        header,
        model: spec.kind_name().to_string(),
        iterations: iterations
            .into_iter()
            .map(|it| HoldoutSummary {
                provider: it.provider,
                metrics: it.metrics,
                n_test: it.test_ids.len(),
                n_train: it.train_ids.len(),
            })
            .collect(),
    })
}

pub fn stage_ranking(
    scored: &FeatureMatrix,
    model: &TrainedModel,
    config: &PipelineConfig,
    header: ReportHeader,
) -> Result<RankingReport, CliError> {
    let entries =
        rank_by_bot_probability(model, scored, config.top_n).map_err(CliError::runtime_from)?;
    Ok(RankingReport {
        header,
        model: model.spec.kind_name().to_string(),
        entries,
    })
}

/// A fitted analysis model bundled with everything needed to score raw
/// account files later: the exact standardization and feature selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub header: ReportHeader,
    pub standardization: StandardizationParams,
    pub selection: FeatureSelection,
    pub model: TrainedModel,
}

impl ModelArtifact {
    /// Scores a raw dataset: assemble features, apply the stored
    /// transform, keep the stored features, rank by bot probability.
    pub fn rank(&self, dataset: &Dataset, top_n: usize) -> Result<Vec<(String, f64)>, CliError> {
        let matrix = FeatureMatrix::from_dataset(dataset);
        let standardized = self
            .standardization
            .apply(&matrix)
            .map_err(CliError::data_from)?;
        let selected = self
            .selection
            .apply(&standardized)
            .map_err(CliError::data_from)?;
        rank_by_bot_probability(&self.model, &selected, top_n).map_err(CliError::runtime_from)
    }
}

pub struct PipelineOutput {
    pub manifest: RunManifest,
    pub model_cv: ModelCvReport,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| CliError::runtime(format!("cannot write {name}: {e}")))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("serialize {name}: {e}")))?;
    text.push('\n');
    write_file(dir, name, &text)
}

/// Runs every stage and writes the full report bundle: a manifest plus
/// the seven reports (selection, model_cv, comparison, confidence,
/// explain, holdout, ranking) in JSON and CSV form, the feature matrix,
/// and the comparison raw samples.
pub fn run_pipeline(config: &PipelineConfig, out_dir: &Path) -> Result<PipelineOutput, CliError> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::runtime(format!("cannot create output dir: {e}")))?;
    let header = ReportHeader::new(config.hash(), config.seed);
    let mut files: Vec<String> = Vec::new();

    // data + features
    let prepared = prepare(config)?;
    let features_csv = {
        let mut text = header.csv_comment();
        text.push_str(
            &FeatureMatrix::from_dataset(&prepared.dataset)
                .to_csv_string()
                .map_err(CliError::runtime_from)?,
        );
        text
    };
    write_file(out_dir, "features.csv", &features_csv)?;
    files.push("features.csv".into());

    // feature management
    let selection = stage_selection(&prepared, config)?;
    let selection_report = SelectionReport {
        header: header.clone(),
        selection: selection.clone(),
    };
    write_json(out_dir, "selection.json", &selection_report)?;
    write_file(out_dir, "selection.csv", &selection_report.to_csv())?;
    files.push("selection.json".into());
    files.push("selection.csv".into());

    // baseline comparison
    let comparison = ComparisonFile {
        header: header.clone(),
        report: stage_comparison(&prepared, config)?,
    };
    write_json(out_dir, "comparison.json", &comparison)?;
    write_file(out_dir, "comparison.csv", &comparison.to_csv())?;
    write_file(out_dir, "comparison_samples.csv", &comparison.samples_csv())?;
    files.push("comparison.json".into());
    files.push("comparison.csv".into());
    files.push("comparison_samples.csv".into());

    // tuned models on the pruned matrix
    let pruned = selection.apply(&prepared.labeled).map_err(CliError::runtime_from)?;
    let split = stage_split(&pruned, &prepared.labels, config)?;
    let model_cv = stage_model_cv(&split, config, header.clone())?;
    write_json(out_dir, "model_cv.json", &model_cv)?;
    write_file(out_dir, "model_cv.csv", &model_cv.to_csv())?;
    files.push("model_cv.json".into());
    files.push("model_cv.csv".into());

    // single-model analyses
    let spec = analysis_spec(config);
    let analysis_model = classifiers::fit(
        &spec,
        &split.train.rows,
        &split.train_y,
        &split.train.feature_names,
        config.seed,
    )
    .map_err(CliError::runtime_from)?;

    let confidence = stage_confidence(&split, &analysis_model, config, header.clone())?;
    write_json(out_dir, "confidence.json", &confidence)?;
    write_file(out_dir, "confidence.csv", &confidence.to_csv())?;
    files.push("confidence.json".into());
    files.push("confidence.csv".into());

    let explain = stage_explain(&pruned, &analysis_model, config, header.clone())?;
    write_json(out_dir, "explain.json", &explain)?;
    write_file(out_dir, "explain.csv", &explain.to_csv())?;
    write_file(out_dir, "pdp.csv", &explain.pdp_csv())?;
    files.push("explain.json".into());
    files.push("explain.csv".into());
    files.push("pdp.csv".into());

    let holdout = stage_holdout(&pruned, &spec, config, header.clone())?;
    write_json(out_dir, "holdout.json", &holdout)?;
    write_file(out_dir, "holdout.csv", &holdout.to_csv())?;
    files.push("holdout.json".into());
    files.push("holdout.csv".into());

    // rank every account, labeled or not, with the trained model
    let scored = selection.apply(&prepared.standardized).map_err(CliError::runtime_from)?;
    let ranking = stage_ranking(&scored, &analysis_model, config, header.clone())?;
    write_json(out_dir, "ranking.json", &ranking)?;
    write_file(out_dir, "ranking.csv", &ranking.to_csv())?;
    files.push("ranking.json".into());
    files.push("ranking.csv".into());

    let n_bots = prepared
        .dataset
        .records
        .iter()
        .filter(|r| r.label == Label::Bot)
        .count();
    let n_genuine = prepared
        .dataset
        .records
        .iter()
        .filter(|r| r.label == Label::Genuine)
        .count();
    let manifest = RunManifest {
        header,
        input: prepared.dataset.provenance.source.clone(),
        n_records: prepared.dataset.len(),
        n_bots,
        n_genuine,
        n_unknown: prepared.dataset.len() - n_bots - n_genuine,
        kept_features: selection.kept.clone(),
        reports: vec![
            "selection".into(),
            "model_cv".into(),
            "comparison".into(),
            "confidence".into(),
            "explain".into(),
            "holdout".into(),
            "ranking".into(),
        ],
        files: {
            let mut all = files.clone();
            all.push("manifest.json".into());
            all.sort();
            all
        },
    };
    write_json(out_dir, "manifest.json", &manifest)?;

    Ok(PipelineOutput { manifest, model_cv })
}
