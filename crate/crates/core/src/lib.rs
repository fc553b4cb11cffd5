//! Behavioral bot detection for Instagram-style account data.
//!
//! The pipeline goes: account records with raw post timestamps
//! ([`account`]) -> a 13-feature matrix of profile metadata plus
//! statistical measures over posting times ([`features`]) ->
//! standardization and feature pruning ([`preprocess`]) -> six
//! from-scratch classifiers behind one contract ([`classifiers`]) ->
//! cross-validation, repeated significance experiments, confidence
//! intervals and provider-holdout evaluation ([`evaluation`]) ->
//! importance and partial-dependence reports ([`explain`]).
//! [`synth`] generates seeded synthetic datasets with a controllable
//! bot/genuine separability dial for benchmarks and tests.

pub mod account;
pub mod classifiers;
pub mod evaluation;
pub mod explain;
pub mod features;
pub mod preprocess;
pub mod synth;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    MalformedLine { line: usize, msg: String },
    #[error("duplicate account id `{0}`")]
    DuplicateId(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("model kind `{0}` does not support this operation")]
    Unsupported(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("sample too small: need at least {need}, got {got}")]
    SampleTooSmall { need: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
