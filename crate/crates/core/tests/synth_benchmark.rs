//! Benchmark-level guarantees of the synthetic generator: the
//! separability dial actually controls baseline difficulty.

use botdetect::classifiers::ModelSpec;
use botdetect::evaluation::kfold_cv;
use botdetect::features::FeatureMatrix;
use botdetect::preprocess::z_standardize;
use botdetect::synth::{generate_dataset, SynthConfig};

fn gnb_cv_accuracy(separability: f64, seed: u64) -> f64 {
    let config = SynthConfig {
        separability,
        seed,
        ..Default::default()
    };
    let ds = generate_dataset(&config).unwrap();
    let matrix = FeatureMatrix::from_dataset(&ds);
    let (z, _) = z_standardize(&matrix).unwrap();
    let y = z.binary_labels().unwrap();
    kfold_cv(&ModelSpec::Gnb(Default::default()), &z.rows, &y, 10, seed)
        .unwrap()
        .mean
        .accuracy
}

#[test]
fn full_separability_is_easy_for_the_baseline() {
    for seed in [42, 1, 2, 3, 4] {
        let acc = gnb_cv_accuracy(1.0, seed);
        assert!(acc > 0.9, "seed {seed}: accuracy {acc}");
    }
}

#[test]
fn zero_separability_is_indistinguishable() {
    for seed in [42, 1, 2, 3, 4] {
        let acc = gnb_cv_accuracy(0.0, seed);
        assert!((0.4..=0.6).contains(&acc), "seed {seed}: accuracy {acc}");
    }
}
