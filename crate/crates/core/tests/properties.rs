//! Property tests for the spec-level invariants.

use botdetect::account::Label;
use botdetect::classifiers::{fit, ModelSpec};
use botdetect::evaluation::{kfold_cv, one_tailed_z_test, roc_auc};
use botdetect::features::{behavioral_measures, FeatureMatrix};
use botdetect::preprocess::{prune_features, split_indices, z_standardize};
use proptest::prelude::*;

fn timestamps() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(0i64..2_000_000_000, 2..200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_moves_location_and_preserves_shape(times in timestamps(), c in -1_000_000i64..1_000_000) {
        let base = behavioral_measures(&times);
        let shifted_times: Vec<i64> = times.iter().map(|&t| (t + c).max(0)).collect();
        // only test when the shift did not clip at zero
        prop_assume!(times.iter().all(|&t| t + c >= 0));
        let shifted = behavioral_measures(&shifted_times);
        let cf = c as f64;
        let tol = 1e-9 * base.mean.abs().max(1.0);
        prop_assert!((shifted.min - (base.min + cf)).abs() <= tol);
        prop_assert!((shifted.max - (base.max + cf)).abs() <= tol);
        prop_assert!((shifted.mean - (base.mean + cf)).abs() <= tol);
        prop_assert!((shifted.median - (base.median + cf)).abs() <= tol);
        prop_assert!((shifted.std - base.std).abs() <= 1e-9 * base.std.max(1.0));
        prop_assert!((shifted.skewness - base.skewness).abs() <= 1e-6);
        prop_assert!((shifted.kurtosis - base.kurtosis).abs() <= 1e-6);
        prop_assert!((shifted.entropy - base.entropy).abs() <= 1e-9);
    }

    #[test]
    fn measures_are_permutation_invariant(times in timestamps(), seed in 0u64..1000) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut shuffled = times.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = behavioral_measures(&times);
        let b = behavioral_measures(&shuffled);
        prop_assert_eq!(a.min, b.min);
        prop_assert_eq!(a.max, b.max);
        prop_assert_eq!(a.median, b.median);
        prop_assert!((a.mean - b.mean).abs() <= 1e-9 * a.mean.abs().max(1.0));
        prop_assert!((a.std - b.std).abs() <= 1e-9 * a.std.max(1.0));
        prop_assert!((a.entropy - b.entropy).abs() <= 1e-12);
    }

    #[test]
    fn split_is_a_deterministic_partition(n in 2usize..300, frac in 0.05f64..0.95, seed in 0u64..500) {
        let (train, test) = split_indices(n, frac, seed).unwrap();
        let (train2, test2) = split_indices(n, frac, seed).unwrap();
        prop_assert_eq!(&train, &train2);
        prop_assert_eq!(&test, &test2);
        prop_assert_eq!(test.len(), (n as f64 * frac).round() as usize);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn roc_auc_is_antisymmetric_without_ties(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4usize..60);
        // distinct scores guarantee no ties
        let mut scores: Vec<f64> = (0..n).map(|i| i as f64).collect();
        use rand::seq::SliceRandom;
        scores.shuffle(&mut rng);
        let mut y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
        y.shuffle(&mut rng);
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        let a = roc_auc(&y, &scores).unwrap();
        let b = roc_auc(&y, &negated).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_test_orders_sum_to_one(shift in -0.5f64..0.5, seed in 0u64..200) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..35).map(|_| rng.gen_range(0.0..1.0) + shift).collect();
        let p1 = one_tailed_z_test(&a, &b).unwrap();
        let p2 = one_tailed_z_test(&b, &a).unwrap();
        prop_assert!((p1 + p2 - 1.0).abs() < 1e-9);
    }
}

fn random_matrix(seed: u64, n: usize, d: usize) -> FeatureMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let labels: Vec<Label> = (0..n)
        .map(|_| if rng.gen_bool(0.5) { Label::Bot } else { Label::Genuine })
        .collect();
    FeatureMatrix {
        feature_names: (0..d).map(|j| format!("f{j}")).collect(),
        ids: (0..n).map(|i| format!("r{i}")).collect(),
        providers: vec![None; n],
        rows,
        labels,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn standardize_normalizes_and_roundtrips(seed in 0u64..500) {
        let m = random_matrix(seed, 40, 3);
        let (z, params) = z_standardize(&m).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = z.rows.iter().map(|r| r[j]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
        }
        let again = params.apply(&m).unwrap();
        for (a, b) in again.rows.iter().flatten().zip(z.rows.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn prune_partitions_features(seed in 0u64..200, corr in 0.5f64..1.2, imp in 0.0f64..0.3) {
        let m = random_matrix(seed, 60, 5);
        let (z, _) = z_standardize(&m).unwrap();
        let sel = prune_features(&z, corr, imp.min(1.0), seed).unwrap();
        let mut names: Vec<String> = sel.kept.clone();
        names.extend(sel.dropped_correlated.iter().map(|d| d.dropped.clone()));
        names.extend(sel.dropped_unimportant.iter().map(|d| d.name.clone()));
        names.sort();
        prop_assert_eq!(names, vec!["f0", "f1", "f2", "f3", "f4"]);
    }

    #[test]
    fn kfold_assignment_partitions_rows(seed in 0u64..200, k in 2usize..8) {
        let m = random_matrix(seed, 50, 2);
        let y: Vec<u8> = m.binary_labels().unwrap();
        prop_assume!(y.contains(&0) && y.contains(&1));
        let report = kfold_cv(&ModelSpec::Gnb(Default::default()), &m.rows, &y, k, seed).unwrap();
        prop_assert_eq!(report.fold_of_row.len(), 50);
        let mut sizes = vec![0usize; k];
        for &f in &report.fold_of_row {
            prop_assert!(f < k);
            sizes[f] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn probabilities_are_normalized_for_every_model(seed in 0u64..50) {
        let m = random_matrix(seed, 24, 2);
        let mut y: Vec<u8> = m.binary_labels().unwrap();
        y[0] = 0;
        y[1] = 1; // both classes guaranteed
        for spec in ModelSpec::all_defaults() {
            let model = fit(&spec, &m.rows, &y, &m.feature_names, seed).unwrap();
            for p in model.predict_proba(&m.rows).unwrap() {
                prop_assert!(p[0] >= 0.0 && p[0] <= 1.0, "{}: {:?}", spec.kind_name(), p);
                prop_assert!(p[1] >= 0.0 && p[1] <= 1.0, "{}: {:?}", spec.kind_name(), p);
                prop_assert!((p[0] + p[1] - 1.0).abs() < 1e-9, "{}: {:?}", spec.kind_name(), p);
            }
        }
    }
}
