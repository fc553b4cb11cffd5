//! The 13-feature representation of an account: five profile-metadata
//! features plus eight statistical measures over post creation times.
//!
//! All measures use population (biased) moments and an excess-kurtosis
//! convention; degenerate inputs map to defined defaults so no NaN or
//! infinity ever leaves this module.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::account::{AccountRecord, Dataset, Label};
use crate::{Error, Result};

/// Canonical feature order. The first five are the "basic" metadata
/// features, the remaining eight the behavioral measures.
pub const FEATURE_NAMES: [&str; 13] = [
    "username_length",
    "full_name_length",
    "biography_length",
    "followers_count",
    "followings_count",
    "min",
    "max",
    "mean",
    "median",
    "std",
    "skewness",
    "kurtosis",
    "entropy",
];

/// Number of basic (metadata) features at the front of [`FEATURE_NAMES`].
pub const N_BASIC: usize = 5;

/// Default bin count for the timestamp entropy histogram.
pub const DEFAULT_ENTROPY_BINS: usize = 16;

/// The eight statistical measures over an account's post creation times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub entropy: f64,
}

impl BehaviorStats {
    pub fn zeros() -> Self {
        BehaviorStats {
            min: 0.0,
            max: 0.0,
            mean: 0.0,
            median: 0.0,
            std: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
            entropy: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.min,
            self.max,
            self.mean,
            self.median,
            self.std,
            self.skewness,
            self.kurtosis,
            self.entropy,
        ]
    }
}

/// Shannon entropy of a histogram with `bins` equal-width bins spanning
/// `[min, max]` of the values, in nats (natural log).
///
/// Returns 0 when the list has fewer than 2 elements or all values
/// coincide. `bins` must be at least 1.
pub fn shannon_entropy(values: &[f64], bins: usize) -> Result<f64> {
    if bins == 0 {
        return Err(Error::InvalidArgument("entropy bins must be >= 1".into()));
    }
    if values.len() < 2 {
        return Ok(0.0);
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(0.0);
    }
    let mut counts = vec![0usize; bins];
    let range = max - min;
    for &v in values {
        let idx = (((v - min) / range) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let n = values.len() as f64;
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.ln();
        }
    }
    Ok(h)
}

/// Computes the eight behavioral measures over post creation times.
///
/// Population moments throughout: std = sqrt(m2), skewness = m3 / m2^1.5,
/// kurtosis = m4 / m2^2 - 3 (excess). Median averages the two middle
/// values for even counts. Degenerate defaults: an empty list yields all
/// zeros; a single timestamp t yields min = max = mean = median = t with
/// the spread measures zero; zero variance forces skewness and kurtosis
/// to zero.
pub fn behavioral_measures(post_times: &[i64]) -> BehaviorStats {
    if post_times.is_empty() {
        return BehaviorStats::zeros();
    }
    let values: Vec<f64> = post_times.iter().map(|&t| t as f64).collect();
    let n = values.len() as f64;

    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };

    let mean = values.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in &values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    let std = m2.sqrt();
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    // bins >= 1, so this cannot fail
    let entropy = shannon_entropy(&values, DEFAULT_ENTROPY_BINS).unwrap();

    BehaviorStats {
        min,
        max,
        mean,
        median,
        std,
        skewness,
        kurtosis,
        entropy,
    }
}

/// One account's 13 named feature values plus its label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub username_length: f64,
    pub full_name_length: f64,
    pub biography_length: f64,
    pub followers_count: f64,
    pub followings_count: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub entropy: f64,
    pub label: Label,
}

impl FeatureVector {
    /// Values in [`FEATURE_NAMES`] order.
    pub fn values(&self) -> [f64; 13] {
        [
            self.username_length,
            self.full_name_length,
            self.biography_length,
            self.followers_count,
            self.followings_count,
            self.min,
            self.max,
            self.mean,
            self.median,
            self.std,
            self.skewness,
            self.kurtosis,
            self.entropy,
        ]
    }
}

/// Builds the full 13-feature vector for one record. The basic block
/// copies the metadata counts; the behavioral block is
/// [`behavioral_measures`] over the record's post times.
pub fn assemble_features(record: &AccountRecord) -> FeatureVector {
    let b = behavioral_measures(&record.post_times);
    let fv = FeatureVector {
        username_length: record.username_length as f64,
        full_name_length: record.full_name_length as f64,
        biography_length: record.biography_length as f64,
        followers_count: record.followers_count as f64,
        followings_count: record.followings_count as f64,
        min: b.min,
        max: b.max,
        mean: b.mean,
        median: b.median,
        std: b.std,
        skewness: b.skewness,
        kurtosis: b.kurtosis,
        entropy: b.entropy,
        label: record.label,
    };
    debug_assert!(fv.values().iter().all(|v| v.is_finite()));
    fv
}

/// A feature matrix: one row per account, columns named, with the label,
/// id and provider tag carried alongside each row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub ids: Vec<String>,
    pub providers: Vec<Option<String>>,
}

impl FeatureMatrix {
    /// Assembles the matrix for every record in dataset order.
    pub fn from_dataset(dataset: &Dataset) -> FeatureMatrix {
        let mut rows = Vec::with_capacity(dataset.len());
        let mut labels = Vec::with_capacity(dataset.len());
        let mut ids = Vec::with_capacity(dataset.len());
        let mut providers = Vec::with_capacity(dataset.len());
        for record in &dataset.records {
            let fv = assemble_features(record);
            rows.push(fv.values().to_vec());
            labels.push(record.label);
            ids.push(record.id.clone());
            providers.push(record.provider_tag().map(str::to_owned));
        }
        FeatureMatrix {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            rows,
            labels,
            ids,
            providers,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|f| f == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx]).collect()
    }

    /// A new matrix keeping only the named columns, in the given order.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let indices: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<_>>()?;
        Ok(FeatureMatrix {
            feature_names: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| indices.iter().map(|&i| r[i]).collect())
                .collect(),
            labels: self.labels.clone(),
            ids: self.ids.clone(),
            providers: self.providers.clone(),
        })
    }

    /// The five metadata columns only.
    pub fn basic_view(&self) -> Result<FeatureMatrix> {
        let names: Vec<String> = FEATURE_NAMES[..N_BASIC]
            .iter()
            .map(|s| s.to_string())
            .collect();
        self.select_columns(&names)
    }

    /// Binary labels (genuine = 0, bot = 1); errors if any row is unlabeled.
    pub fn binary_labels(&self) -> Result<Vec<u8>> {
        self.labels
            .iter()
            .map(|l| {
                l.as_binary().ok_or_else(|| {
                    Error::InvalidArgument("matrix contains unlabeled (unknown) rows".into())
                })
            })
            .collect()
    }

    /// A new matrix holding the given row indices, in index order.
    pub fn take_rows(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            providers: indices.iter().map(|&i| self.providers[i].clone()).collect(),
        }
    }

    /// CSV export: header row with every feature name plus `label`, one
    /// account per row, columns in declared order.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        let mut header: Vec<String> = self.feature_names.clone();
        header.push("label".into());
        writer
            .write_record(&header)
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            fields.push(label.as_str().to_string());
            writer
                .write_record(&fields)
                .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        }
        writer
            .flush()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidArgument(format!("csv utf8: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_series_hits_degenerate_defaults() {
        let s = behavioral_measures(&[100, 100, 100]);
        assert_eq!(s.min, 100.0);
        assert_eq!(s.max, 100.0);
        assert_eq!(s.mean, 100.0);
        assert_eq!(s.median, 100.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.skewness, 0.0);
        assert_eq!(s.kurtosis, 0.0);
        assert_eq!(s.entropy, 0.0);
    }

    #[test]
    fn four_point_series_matches_hand_moments() {
        let s = behavioral_measures(&[1, 2, 3, 4]);
        assert_abs_diff_eq!(s.mean, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.median, 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.std, 1.25f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.skewness, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.kurtosis, -1.36, epsilon = 1e-12);
    }

    #[test]
    fn empty_series_is_all_zeros() {
        assert_eq!(behavioral_measures(&[]), BehaviorStats::zeros());
    }

    #[test]
    fn single_timestamp_keeps_location_measures() {
        let s = behavioral_measures(&[42]);
        assert_eq!(s.min, 42.0);
        assert_eq!(s.max, 42.0);
        assert_eq!(s.mean, 42.0);
        assert_eq!(s.median, 42.0);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.entropy, 0.0);
    }

    #[test]
    fn entropy_of_uniform_16_bins_is_ln16() {
        // one value centered in each of the 16 bins
        let values: Vec<f64> = (0..16).map(|i| i as f64 + 0.5).collect();
        let h = shannon_entropy(&values, 16).unwrap();
        assert_abs_diff_eq!(h, 16f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn entropy_of_equal_values_is_zero() {
        assert_eq!(shannon_entropy(&[7.0, 7.0, 7.0], 16).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_three_one_split_matches_hand_value() {
        // proportions [0.75, 0.25] over two bins
        let values = vec![0.0, 0.1, 0.2, 0.9];
        let h = shannon_entropy(&values, 2).unwrap();
        let expect = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert_abs_diff_eq!(h, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.56234, epsilon = 1e-5);
    }

    #[test]
    fn entropy_rejects_zero_bins() {
        assert!(shannon_entropy(&[1.0, 2.0], 0).is_err());
    }

    fn record(post_times: Vec<i64>) -> AccountRecord {
        AccountRecord {
            id: "x".into(),
            label: Label::Genuine,
            provider: None,
            username_length: 8,
            full_name_length: 9,
            biography_length: 10,
            followers_count: 11,
            followings_count: 12,
            post_times,
        }
    }

    #[test]
    fn assemble_with_empty_posts_zeroes_behavioral_block() {
        let fv = assemble_features(&record(vec![]));
        let values = fv.values();
        assert_eq!(&values[..5], &[8.0, 9.0, 10.0, 11.0, 12.0]);
        assert!(values[5..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn assemble_two_posts_matches_moments() {
        let fv = assemble_features(&record(vec![10, 20]));
        assert_eq!(fv.min, 10.0);
        assert_eq!(fv.max, 20.0);
        assert_eq!(fv.mean, 15.0);
    }

    #[test]
    fn id_is_not_a_feature() {
        let mut a = record(vec![1, 2, 3]);
        let mut b = record(vec![1, 2, 3]);
        a.id = "a".into();
        b.id = "b".into();
        assert_eq!(assemble_features(&a), assemble_features(&b));
    }

    #[test]
    fn csv_has_header_and_label_column() {
        let ds = Dataset::new(vec![record(vec![5, 6])], "test").unwrap();
        let m = FeatureMatrix::from_dataset(&ds);
        let csv = m.to_csv_string().unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("username_length,"));
        assert!(header.ends_with(",label"));
        assert_eq!(header.split(',').count(), 14);
        assert!(lines.next().unwrap().ends_with(",genuine"));
    }
}
