//! Report types written by the pipeline and their CSV renditions. Every
//! file carries the artifact version, config hash and master seed; JSON
//! reports embed them as a header object, CSV files as a leading `#`
//! comment line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use botdetect::evaluation::{ComparisonReport, Metrics};
use botdetect::explain::PdpCurve;
use botdetect::preprocess::FeatureSelection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub artifact_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl ReportHeader {
    pub fn new(config_hash: String, seed: u64) -> Self {
        ReportHeader {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seed,
        }
    }

    pub fn csv_comment(&self) -> String {
        format!(
            "# artifact_version={} config_hash={} seed={}\n",
            self.artifact_version, self.config_hash, self.seed
        )
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub header: ReportHeader,
    pub selection: FeatureSelection,
}

impl SelectionReport {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("feature,status,detail\n");
        for name in &self.selection.kept {
            let _ = writeln!(out, "{name},kept,");
        }
        for d in &self.selection.dropped_correlated {
            let _ = writeln!(
                out,
                "{},dropped_correlated,r={} with {}",
                d.dropped, d.r, d.kept_partner
            );
        }
        for d in &self.selection.dropped_unimportant {
            let _ = writeln!(out, "{},dropped_unimportant,importance={}", d.name, d.importance);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCvRow {
    pub model: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub roc_auc: Option<f64>,
}

/// Classification-results table: cross-validated means per model plus the
/// held-out-test ROC AUC, with per-column maxima flagged the way the
/// source table bolds its best values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCvReport {
    pub header: ReportHeader,
    pub rows: Vec<ModelCvRow>,
    /// Metric name -> models achieving the column maximum.
    pub column_maxima: BTreeMap<String, Vec<String>>,
}

impl ModelCvReport {
    pub fn new(header: ReportHeader, rows: Vec<ModelCvRow>) -> Self {
        type Getter = fn(&ModelCvRow) -> Option<f64>;
        let mut column_maxima = BTreeMap::new();
        let columns: [(&str, Getter); 5] = [
            ("accuracy", |r| Some(r.accuracy)),
            ("precision", |r| Some(r.precision)),
            ("recall", |r| Some(r.recall)),
            ("f1", |r| Some(r.f1)),
            ("roc_auc", |r| r.roc_auc),
        ];
        for (name, get) in columns {
            let best = rows
                .iter()
                .filter_map(&get)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                let winners: Vec<String> = rows
                    .iter()
                    .filter(|r| get(r).is_some_and(|v| v == best))
                    .map(|r| r.model.clone())
                    .collect();
                column_maxima.insert(name.to_string(), winners);
            }
        }
        ModelCvReport {
            header,
            rows,
            column_maxima,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("model,accuracy,precision,recall,f1,roc_auc\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.model,
                r.accuracy,
                r.precision,
                r.recall,
                r.f1,
                fmt_opt(r.roc_auc)
            );
        }
        out
    }

    /// Plain-text table for standard output; column maxima are starred.
    pub fn to_text(&self) -> String {
        let starred = |metric: &str, model: &str, v: f64| {
            let star = self
                .column_maxima
                .get(metric)
                .is_some_and(|ms| ms.iter().any(|m| m == model));
            format!("{}{:.2}", if star { "*" } else { " " }, v)
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:>9} {:>10} {:>8} {:>8} {:>8}",
            "model", "accuracy", "precision", "recall", "f1", "roc_auc"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} {:>9} {:>10} {:>8} {:>8} {:>8}",
                r.model,
                starred("accuracy", &r.model, r.accuracy),
                starred("precision", &r.model, r.precision),
                starred("recall", &r.model, r.recall),
                starred("f1", &r.model, r.f1),
                r.roc_auc
                    .map_or_else(|| "-".into(), |v| starred("roc_auc", &r.model, v)),
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonFile {
    pub header: ReportHeader,
    pub report: ComparisonReport,
}

impl ComparisonFile {
    /// Summary table: one row per metric, both arms as mean +/- 2 std.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("metric,basic_mean,basic_band,all_mean,all_band,p_value\n");
        for s in &self.report.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.metric,
                s.basic_mean,
                s.basic_band,
                s.all_mean,
                s.all_band,
                fmt_opt(s.p_value)
            );
        }
        out
    }

    /// Raw per-repetition samples in long format for density plots.
    pub fn samples_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("repetition,arm,metric,value\n");
        for (arm_name, samples) in [("basic", &self.report.basic), ("all", &self.report.all)] {
            for metric in botdetect::evaluation::COMPARED_METRICS {
                for (i, v) in samples.by_name(metric).iter().enumerate() {
                    let _ = writeln!(out, "{i},{arm_name},{metric},{v}");
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassInterval {
    pub class: String,
    pub center: f64,
    pub half_width: f64,
    pub n: usize,
    /// Whether the sample met the >= 30 size criterion.
    pub size_guard_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub header: ReportHeader,
    pub level: f64,
    pub intervals: Vec<ClassInterval>,
}

impl ConfidenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("class,center,half_width,n,size_guard_met\n");
        for i in &self.intervals {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i.class, i.center, i.half_width, i.n, i.size_guard_met
            );
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainReport {
    pub header: ReportHeader,
    pub model: String,
    pub importance: Vec<(String, f64)>,
    pub pdp: Vec<PdpCurve>,
}

impl ExplainReport {
    /// Importance ranking (the PDP curves get their own CSV).
    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("feature,gini_importance\n");
        for (name, value) in &self.importance {
            let _ = writeln!(out, "{name},{value}");
        }
        out
    }

    pub fn pdp_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("feature,grid_value,mean_p_bot\n");
        for curve in &self.pdp {
            for (g, p) in curve.grid.iter().zip(&curve.mean_p_bot) {
                let _ = writeln!(out, "{},{},{}", curve.feature_name, g, p);
            }
        }
        out
    }

    /// One CSV per feature, as emitted by the `explain` subcommand.
    pub fn per_feature_csv(&self, curve: &PdpCurve) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("grid_value,mean_p_bot\n");
        for (g, p) in curve.grid.iter().zip(&curve.mean_p_bot) {
            let _ = writeln!(out, "{g},{p}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutSummary {
    pub provider: String,
    pub metrics: Metrics,
    pub n_test: usize,
    pub n_train: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutReport {
    pub header: ReportHeader,
    pub model: String,
    pub iterations: Vec<HoldoutSummary>,
}

impl HoldoutReport {
    /// Provider columns, measure rows, matching the class-by-class table.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("measure");
        for it in &self.iterations {
            let _ = write!(out, ",{}", it.provider);
        }
        out.push('\n');
        type Getter = fn(&Metrics) -> f64;
        let rows: [(&str, Getter); 4] = [
            ("accuracy", |m| m.accuracy),
            ("precision", |m| m.precision),
            ("recall", |m| m.recall),
            ("f1", |m| m.f1),
        ];
        for (name, get) in rows {
            let _ = write!(out, "{name}");
            for it in &self.iterations {
                let _ = write!(out, ",{}", get(&it.metrics));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub header: ReportHeader,
    pub model: String,
    pub entries: Vec<(String, f64)>,
}

impl RankingReport {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.csv_comment();
        out.push_str("rank,id,p_bot\n");
        for (i, (id, p)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, id, p);
        }
        out
    }
}

/// Index of everything a pipeline run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub header: ReportHeader,
    pub input: String,
    pub n_records: usize,
    pub n_bots: usize,
    pub n_genuine: usize,
    pub n_unknown: usize,
    pub kept_features: Vec<String>,
    pub reports: Vec<String>,
    pub files: Vec<String>,
}
