//! Pipeline configuration: one data source (file or synthetic), model
//! specs, thresholds, experiment sizes, and the master seed.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use botdetect::classifiers::ModelSpec;
use botdetect::synth::SynthConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// JSONL dataset to load. Mutually exclusive with `synth`; when
    /// neither is set the default synthetic benchmark is used.
    pub dataset_path: Option<String>,
    pub synth: Option<SynthConfig>,
    pub models: Vec<ModelSpec>,
    pub corr_threshold: f64,
    pub importance_threshold: f64,
    pub repetitions: usize,
    pub shuffles_per_rep: usize,
    pub k: usize,
    pub test_fraction: f64,
    pub top_n: usize,
    pub pdp_grid_size: usize,
    pub confidence_level: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dataset_path: None,
            synth: None,
            models: ModelSpec::all_defaults(),
            corr_threshold: 0.95,
            importance_threshold: 0.01,
            repetitions: 100,
            shuffles_per_rep: 10,
            k: 10,
            test_fraction: 0.3,
            top_n: 50,
            pdp_grid_size: 50,
            confidence_level: 0.95,
            seed: 42,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }

    /// The resolved data source; rejects configs naming both.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dataset_path.is_some() && self.synth.is_some() {
            return Err(CliError::config(
                "exactly one data source may be set; found both dataset_path and synth".into(),
            ));
        }
        if let Some(s) = &self.synth {
            s.validate().map_err(CliError::config_from)?;
        }
        if self.models.is_empty() {
            return Err(CliError::config("models must not be empty".into()));
        }
        for spec in &self.models {
            spec.validate().map_err(CliError::config_from)?;
        }
        if !self.corr_threshold.is_finite() || self.corr_threshold < 0.0 {
            return Err(CliError::config(format!(
                "corr_threshold must be finite and >= 0, got {}",
                self.corr_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.importance_threshold) {
            return Err(CliError::config(format!(
                "importance_threshold must be in [0, 1], got {}",
                self.importance_threshold
            )));
        }
        if self.repetitions < 2 {
            return Err(CliError::config("repetitions must be >= 2".into()));
        }
        if self.k < 2 {
            return Err(CliError::config("k must be >= 2".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(CliError::config(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.pdp_grid_size < 2 {
            return Err(CliError::config("pdp_grid_size must be >= 2".into()));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(CliError::config(format!(
                "confidence_level must be in (0, 1), got {}",
                self.confidence_level
            )));
        }
        Ok(())
    }

    /// The synthetic config in effect when no dataset path is given.
    pub fn synth_config(&self) -> SynthConfig {
        self.synth.clone().unwrap_or_default()
    }

    /// SHA-256 of the canonical JSON serialization of the resolved
    /// config; identical configs hash identically regardless of how
    /// they were supplied.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_data_sources_is_a_config_error() {
        let config = PipelineConfig {
            dataset_path: Some("x.jsonl".into()),
            synth: Some(SynthConfig::default()),
            ..Default::default()
        };
        let err = config.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn default_config_is_valid_and_hash_is_stable() {
        let a = PipelineConfig::default();
        a.validate().unwrap();
        let b = PipelineConfig::default();
        assert_eq!(a.hash(), b.hash());
        let c = PipelineConfig {
            seed: 43,
            ..Default::default()
        };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let config: PipelineConfig = serde_json::from_str(r#"{"seed": 7, "k": 5}"#).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.k, 5);
        assert_eq!(config.repetitions, 100);
        assert_eq!(config.models.len(), 6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sede": 7}"#).is_err());
    }
}
