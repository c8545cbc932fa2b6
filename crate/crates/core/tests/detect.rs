use proptest::prelude::*;
use rand::Rng;
use sbm_spectra::detect::{
    count_outliers, detect_once, detection_accuracy, gap_check, kmeans, sign_partition, spectral_partition,
    sweep_k, top_spectrum, DetectError, Partition, DEFAULT_C,
};
use sbm_spectra::edge::{extreme_eigenvalues, ExtremalSolver};
use sbm_spectra::model::{expected_adjacency, SbmGraph, SbmParams};
use sbm_spectra::rng::seeded;
use sbm_spectra::spectra::{eigen_sym, SampleMeta, SpectralSample};

fn descending(mut v: Vec<f64>) -> SpectralSample {
    v.sort_by(|a, b| b.total_cmp(a));
    let n = v.len();
    SpectralSample::new(n, v, None, SampleMeta::default())
}

#[test]
fn random_labels_score_near_chance() {
    let params = SbmParams::new(3000, 3, 0.03, 0.01, 0).unwrap();
    let truth = Partition::truth(&params);
    let mut rng = seeded(4);
    for _ in 0..5 {
        let labels = (0..3000).map(|_| rng.random_range(0..3)).collect();
        let acc = detection_accuracy(&Partition::new(labels, 3).unwrap(), &truth).unwrap();
        assert!((0.30..=0.37).contains(&acc), "{acc}");
    }
    assert_eq!(detection_accuracy(&truth, &truth).unwrap(), 1.0);
}

#[test]
fn expected_matrix_is_recovered_exactly() {
    for k in [2, 3, 4] {
        let params = SbmParams::new(120, k, 0.3, 0.05, 0).unwrap();
        let s = eigen_sym(&expected_adjacency(&params), true).unwrap();
        let p = spectral_partition(&s, k, 1).unwrap();
        assert_eq!(detection_accuracy(&p, &Partition::truth(&params)).unwrap(), 1.0, "k {k}");
    }
}

#[test]
fn flat_expected_matrix_is_degenerate() {
    let params = SbmParams::new(120, 2, 0.2, 0.2, 0).unwrap();
    let s = eigen_sym(&expected_adjacency(&params), true).unwrap();
    let err = spectral_partition(&s, 2, 1).unwrap_err();
    assert!(matches!(err, DetectError::DegenerateEmbedding { k: 2, .. }), "{err}");
    assert!(sbm_spectra::Error::from(err).is_numerical());
}

#[test]
fn outliers_respect_weyl_bound() {
    let params = SbmParams::new(900, 3, 0.06, 0.02, 10).unwrap();
    for seed in 0..4 {
        let g = SbmGraph::sample(&params, seed).unwrap();
        let top = top_spectrum(&g, 4, false, 7).unwrap();
        let (lam1_centered, _) = extreme_eigenvalues(&params, seed, ExtremalSolver::Dense).unwrap();
        assert!(top.eigenvalues()[3] <= lam1_centered + 1e-9);
    }
}

#[test]
fn passing_gap_means_usable_embedding() {
    let params = SbmParams::new(600, 2, 0.1, 0.02, 0).unwrap();
    let mut passed = 0;
    for seed in 0..6 {
        let g = SbmGraph::sample(&params, seed).unwrap();
        let s = top_spectrum(&g, 5, true, seed).unwrap();
        let report = gap_check(&s, 2, DEFAULT_C).unwrap();
        if report.pass {
            passed += 1;
            spectral_partition(&s, 2, seed).unwrap();
        }
    }
    assert!(passed > 0);
}

#[test]
fn sign_split_matches_kmeans() {
    let params = SbmParams::new(1000, 2, 0.05, 0.01, 3).unwrap();
    let g = SbmGraph::sample(&params, 3).unwrap();
    let s = top_spectrum(&g, 4, true, 3).unwrap();
    let a = sign_partition(&s).unwrap();
    let b = spectral_partition(&s, 2, 3).unwrap();
    assert!(detection_accuracy(&a, &b).unwrap() >= 0.99);
    assert!(detection_accuracy(&a, &Partition::truth(&params)).unwrap() >= 0.9);
}

#[test]
fn three_block_gap_is_wide() {
    let params = SbmParams::new(3000, 3, 0.03, 0.01, 3000).unwrap();
    let out = detect_once(&params, 3000, DEFAULT_C, true).unwrap();
    assert_eq!(out.k_hat, 3);
    assert!(out.gap_report.pass);
    assert!(out.gap_report.gap >= 0.8, "{}", out.gap_report.gap);
    assert!(out.accuracy.unwrap() >= 0.95);
    assert_eq!(out, detect_once(&params, 3000, DEFAULT_C, true).unwrap());
}

#[test]
fn sweep_skips_non_divisors() {
    let params = SbmParams::new(600, 2, 0.1, 0.02, 1).unwrap();
    let reports = sweep_k(&params, &[1, 2, 4, 7], DEFAULT_C).unwrap();
    let ks: Vec<usize> = reports.iter().map(|r| r.k).collect();
    assert_eq!(ks, vec![1, 2, 4]);
}

#[test]
fn bad_requests() {
    let s = descending(vec![3.0, 2.5, 1.0]);
    assert!(matches!(gap_check(&s, 2, 0.1), Err(DetectError::InvalidRequest(_))));
    assert!(matches!(spectral_partition(&s, 2, 0), Err(DetectError::MissingVectors)));
    assert!(Partition::new(vec![0, 3], 2).is_err());
    let t = Partition::new(vec![0, 1, 0], 2).unwrap();
    let u = Partition::new(vec![0, 1], 2).unwrap();
    assert!(matches!(detection_accuracy(&t, &u), Err(DetectError::SizeMismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn outlier_count_falls_with_threshold(v in prop::collection::vec(-3.0f64..6.0, 1..50), c1 in 0.0f64..2.0, c2 in 0.0f64..2.0) {
        let s = descending(v.clone());
        let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(count_outliers(&s, 2.0 + hi) <= count_outliers(&s, 2.0 + lo));
        prop_assert_eq!(count_outliers(&s, 2.0 + lo), v.iter().filter(|&&x| x > 2.0 + lo).count());
    }

    #[test]
    fn accuracy_ignores_label_names(labels in prop::collection::vec(0usize..3, 3..80), shift in 0usize..3) {
        let p = Partition::new(labels.clone(), 3).unwrap();
        let q = Partition::new(labels.iter().map(|l| (l + shift) % 3).collect(), 3).unwrap();
        prop_assert_eq!(detection_accuracy(&p, &q).unwrap(), 1.0);
        let acc = detection_accuracy(&p, &Partition::new(vec![0; labels.len()], 3).unwrap()).unwrap();
        prop_assert!(acc >= 1.0 / 3.0 - 1e-12);
    }

    #[test]
    fn kmeans_is_seed_deterministic(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let x: Vec<f64> = (0..120).map(|i| (i / 40) as f64 * 5.0 + rng.random_range(-1.0..1.0)).collect();
        let (a, ia) = kmeans(&x, 60, 2, 3, 4, seed);
        let (b, ib) = kmeans(&x, 60, 2, 3, 4, seed);
        prop_assert_eq!(a, b);
        prop_assert_eq!(ia, ib);
    }
}
