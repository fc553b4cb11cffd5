use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use botdetect::account::save_dataset;
use botdetect::classifiers;
use botdetect_cli::config::PipelineConfig;
use botdetect_cli::pipeline::{self, ModelArtifact};
use botdetect_cli::reports::{ComparisonFile, RankingReport, ReportHeader, SelectionReport};
use botdetect_cli::CliError;

#[derive(Parser)]
#[command(
    name = "botdetect",
    about = "Behavioral bot detection: synthetic data, training, evaluation and reports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON pipeline configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// JSONL dataset path; overrides the config file's data source.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Correlation cutoff for the pruning phase.
    #[arg(long, global = true)]
    corr_threshold: Option<f64>,
    /// Gini-importance cutoff for the pruning phase.
    #[arg(long, global = true)]
    importance_threshold: Option<f64>,
    /// Repetition count of the comparison experiment (paper scale: 1000).
    #[arg(long, global = true)]
    repetitions: Option<usize>,
    /// Shuffles per repetition (paper scale: 100).
    #[arg(long, global = true)]
    shuffles_per_rep: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as JSONL.
    Gen(Common),
    /// Emit the 13-feature matrix as CSV.
    Features(Common),
    /// Run the two-phase feature pruning and emit the selection.
    Prune(Common),
    /// Fit the analysis model on all labeled rows and save the artifact.
    Train(Common),
    /// Cross-validate every configured model (classification table).
    Cv(Common),
    /// Run the repeated basic-vs-all-features significance experiment.
    Compare(Common),
    /// Leave-one-provider-out evaluation.
    Holdout(Common),
    /// Gini importance and partial-dependence curves.
    Explain(Common),
    /// Rank accounts by bot probability with a saved model artifact.
    Rank {
        #[command(flatten)]
        common: Common,
        /// Saved model artifact from `train`.
        #[arg(long)]
        model: PathBuf,
        /// Number of accounts to list.
        #[arg(long, default_value_t = 50)]
        top: usize,
    },
    /// Run every stage and write the full report bundle.
    Pipeline(Common),
}

fn resolve_config(common: &Common) -> Result<PipelineConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
        if let Some(synth) = &mut config.synth {
            synth.seed = seed;
        }
    }
    if let Some(data) = &common.data {
        config.dataset_path = Some(data.display().to_string());
        config.synth = None;
    }
    if let Some(v) = common.corr_threshold {
        config.corr_threshold = v;
    }
    if let Some(v) = common.importance_threshold {
        config.importance_threshold = v;
    }
    if let Some(v) = common.repetitions {
        config.repetitions = v;
    }
    if let Some(v) = common.shuffles_per_rep {
        config.shuffles_per_rep = v;
    }
    config.validate()?;
    Ok(config)
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create output dir: {e}")))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), text)
        .map_err(|e| CliError::runtime(format!("cannot write {name}: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(common) => {
            let config = resolve_config(&common)?;
            if config.dataset_path.is_some() {
                return Err(CliError::config(
                    "gen requires a synthetic data source, not a dataset path".into(),
                ));
            }
            let synth = {
                let mut s = config.synth_config();
                if let Some(seed) = common.seed {
                    s.seed = seed;
                }
                s
            };
            let dataset =
                botdetect::synth::generate_dataset(&synth).map_err(CliError::config_from)?;
            ensure_out(&common.out)?;
            let path = common.out.join("data.jsonl");
            save_dataset(&dataset, &path).map_err(CliError::runtime_from)?;
            println!("wrote {} records to {}", dataset.len(), path.display());
        }
        Command::Features(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            ensure_out(&common.out)?;
            let mut text = header.csv_comment();
            text.push_str(
                &botdetect::features::FeatureMatrix::from_dataset(&prepared.dataset)
                    .to_csv_string()
                    .map_err(CliError::runtime_from)?,
            );
            write_text(&common.out, "features.csv", &text)?;
            println!(
                "wrote features.csv ({} rows) to {}",
                prepared.dataset.len(),
                common.out.display()
            );
        }
        Command::Prune(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            let selection = pipeline::stage_selection(&prepared, &config)?;
            let report = SelectionReport { header, selection };
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "selection.json", &report)?;
            write_text(&common.out, "selection.csv", &report.to_csv())?;
            println!("kept features: {}", report.selection.kept.join(", "));
        }
        Command::Train(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            let selection = pipeline::stage_selection(&prepared, &config)?;
            let pruned = selection
                .apply(&prepared.labeled)
                .map_err(CliError::runtime_from)?;
            let spec = pipeline::analysis_spec(&config);
            let model = classifiers::fit(
                &spec,
                &pruned.rows,
                &prepared.labels,
                &pruned.feature_names,
                config.seed,
            )
            .map_err(CliError::runtime_from)?;
            let artifact = ModelArtifact {
                header,
                standardization: prepared.params.clone(),
                selection,
                model,
            };
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "model.json", &artifact)?;
            println!(
                "trained {} on {} rows; artifact at {}",
                spec.kind_name(),
                pruned.n_rows(),
                common.out.join("model.json").display()
            );
        }
        Command::Cv(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            let selection = pipeline::stage_selection(&prepared, &config)?;
            let pruned = selection
                .apply(&prepared.labeled)
                .map_err(CliError::runtime_from)?;
            let split = pipeline::stage_split(&pruned, &prepared.labels, &config)?;
            let report = pipeline::stage_model_cv(&split, &config, header)?;
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "model_cv.json", &report)?;
            write_text(&common.out, "model_cv.csv", &report.to_csv())?;
            print!("{}", report.to_text());
        }
        Command::Compare(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            let report = ComparisonFile {
                header,
                report: pipeline::stage_comparison(&prepared, &config)?,
            };
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "comparison.json", &report)?;
            write_text(&common.out, "comparison.csv", &report.to_csv())?;
            write_text(&common.out, "comparison_samples.csv", &report.samples_csv())?;
            for s in &report.report.summary {
                println!(
                    "{:<9} basic {:.2} +/- {:.2} | all {:.2} +/- {:.2} | p {}",
                    s.metric,
                    s.basic_mean,
                    s.basic_band,
                    s.all_mean,
                    s.all_band,
                    s.p_value.map_or("n/a".into(), |p| format!("{p:.2}")),
                );
            }
        }
        Command::Holdout(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            let selection = pipeline::stage_selection(&prepared, &config)?;
            let pruned = selection
                .apply(&prepared.labeled)
                .map_err(CliError::runtime_from)?;
            let spec = pipeline::analysis_spec(&config);
            let report = pipeline::stage_holdout(&pruned, &spec, &config, header)?;
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "holdout.json", &report)?;
            write_text(&common.out, "holdout.csv", &report.to_csv())?;
            for it in &report.iterations {
                println!(
                    "{}: accuracy {:.2} (test {} rows)",
                    it.provider, it.metrics.accuracy, it.n_test
                );
            }
        }
        Command::Explain(common) => {
            let config = resolve_config(&common)?;
            let header = ReportHeader::new(config.hash(), config.seed);
            let prepared = pipeline::prepare(&config)?;
            let selection = pipeline::stage_selection(&prepared, &config)?;
            let pruned = selection
                .apply(&prepared.labeled)
                .map_err(CliError::runtime_from)?;
            let split = pipeline::stage_split(&pruned, &prepared.labels, &config)?;
            let spec = pipeline::analysis_spec(&config);
            let model = classifiers::fit(
                &spec,
                &split.train.rows,
                &split.train_y,
                &split.train.feature_names,
                config.seed,
            )
            .map_err(CliError::runtime_from)?;
            let report = pipeline::stage_explain(&pruned, &model, &config, header)?;
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "explain.json", &report)?;
            write_text(&common.out, "explain.csv", &report.to_csv())?;
            for curve in &report.pdp {
                write_text(
                    &common.out,
                    &format!("pdp_{}.csv", curve.feature_name),
                    &report.per_feature_csv(curve),
                )?;
            }
            for (name, value) in &report.importance {
                println!("{name}: {value:.4}");
            }
        }
        Command::Rank { common, model, top } => {
            let text = std::fs::read_to_string(&model)
                .map_err(|e| CliError::data(format!("cannot read model artifact: {e}")))?;
            let artifact: ModelArtifact = serde_json::from_str(&text)
                .map_err(|e| CliError::data(format!("invalid model artifact: {e}")))?;
            let config = resolve_config(&common)?;
            let dataset = pipeline::load_or_generate(&config)?;
            let entries = artifact.rank(&dataset, top)?;
            let report = RankingReport {
                header: artifact.header.clone(),
                model: artifact.model.spec.kind_name().to_string(),
                entries,
            };
            ensure_out(&common.out)?;
            pipeline::write_json(&common.out, "ranking.json", &report)?;
            write_text(&common.out, "ranking.csv", &report.to_csv())?;
            for (i, (id, p)) in report.entries.iter().take(10).enumerate() {
                println!("{:>3}. {id}  p_bot={p:.4}", i + 1);
            }
        }
        Command::Pipeline(common) => {
            let config = resolve_config(&common)?;
            let output = pipeline::run_pipeline(&config, &common.out)?;
            println!(
                "pipeline complete: {} records from {}; reports in {}",
                output.manifest.n_records,
                output.manifest.input,
                common.out.display()
            );
            print!("{}", output.model_cv.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
