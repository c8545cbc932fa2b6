use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use sbm_spectra::model::{SbmGraph, SbmParams, SymMatrix};
use sbm_spectra::oracle::jacobi_eigenvalues;
use sbm_spectra::rng::seeded;
use sbm_spectra::spectra::{
    eigen_sym, empirical_stieltjes, esd_count, extremal_dense, lanczos, orthonormality_residual,
    reconstruction_residual, resolvent, resolvent_entry_stats, LanczosOptions, SpectraError, SymOperator,
};

fn random_sym(n: usize, seed: u64) -> SymMatrix {
    let mut rng = seeded(seed);
    SymMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0))
}

fn sym_from(n: usize, entries: &[f64]) -> SymMatrix {
    let mut it = entries.iter().copied().cycle();
    SymMatrix::from_upper(n, |_, _| it.next().unwrap())
}

fn centered_sbm(n: usize, seed: u64) -> SymMatrix {
    let params = SbmParams::new(n, 2, 0.1, 0.04, seed).unwrap();
    SbmGraph::sample(&params, seed).unwrap().centered()
}

#[test]
fn eigenvectors_are_orthonormal_and_reconstruct() {
    let h = centered_sbm(300, 11);
    let s = eigen_sym(&h, true).unwrap();
    assert!(orthonormality_residual(&s).unwrap() <= 1e-8);
    assert!(reconstruction_residual(&h, &s).unwrap() <= 1e-8);
    for w in s.eigenvalues().windows(2) {
        assert!(w[0] >= w[1]);
    }
}

#[test]
fn lanczos_matches_dense() {
    let h = centered_sbm(400, 4);
    let dense = eigen_sym(&h, false).unwrap();
    let ev = dense.eigenvalues();
    let opts = LanczosOptions {
        n_top: 3,
        n_bottom: 2,
        ..LanczosOptions::default()
    };
    let lz = lanczos(&h, &opts).unwrap();
    for (i, v) in lz.top.iter().enumerate() {
        assert!((v - ev[i]).abs() <= 1e-9, "top {i}: {v} vs {}", ev[i]);
    }
    for (i, v) in lz.bottom.iter().enumerate() {
        let d = ev[ev.len() - 1 - i];
        assert!((v - d).abs() <= 1e-9, "bottom {i}: {v} vs {d}");
    }
}

#[test]
fn matrix_free_operator_matches_dense() {
    let params = SbmParams::new(501, 3, 0.06, 0.02, 8).unwrap();
    let g = SbmGraph::sample(&params, 8).unwrap();
    for centered in [false, true] {
        let dense = if centered { g.centered() } else { g.adjacency() };
        let op = g.operator(centered);
        assert_eq!(op.dim(), 501);
        let mut rng = seeded(1);
        let x: Vec<f64> = (0..501).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (mut y1, mut y2) = (vec![0.0; 501], vec![0.0; 501]);
        op.apply(&x, &mut y1);
        dense.apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
        let top = lanczos(&op, &LanczosOptions::default()).unwrap().top[0];
        let (hi, _) = extremal_dense(&dense);
        assert!((top - hi).abs() < 1e-9);
    }
}

#[test]
fn extremal_dense_matches_full() {
    let h = random_sym(120, 3);
    let s = eigen_sym(&h, false).unwrap();
    let (hi, lo) = extremal_dense(&h);
    assert!((hi - s.eigenvalues()[0]).abs() < 1e-12);
    assert!((lo - s.eigenvalues()[119]).abs() < 1e-12);
}

#[test]
fn stieltjes_matches_resolvent_trace() {
    let h = random_sym(50, 17);
    let s = eigen_sym(&h, false).unwrap();
    for z in [Complex64::new(0.3, 0.1), Complex64::new(-2.0, 1e-3), Complex64::new(5.0, 2.0)] {
        let m = empirical_stieltjes(&s, z).unwrap();
        let g = resolvent(&h, z).unwrap();
        let tr: Complex64 = (0..50).map(|i| g.get(i, i)).sum::<Complex64>() / 50.0;
        assert!((m - tr).norm() <= 1e-10 * m.norm().max(1.0), "{z}: {m} vs {tr}");
        let stats = resolvent_entry_stats(&h, z, false).unwrap();
        assert!((stats.m() - tr).norm() < 1e-12);
    }
}

#[test]
fn stieltjes_positivity_and_bound() {
    let s = eigen_sym(&centered_sbm(200, 2), false).unwrap();
    let mut rng = seeded(5);
    for _ in 0..500 {
        let z = Complex64::new(rng.random_range(-4.0..4.0), 10f64.powf(rng.random_range(-4.0..1.0)));
        let m = empirical_stieltjes(&s, z).unwrap();
        assert!(m.im > 0.0);
        assert!(m.norm() <= 1.0 / z.im * (1.0 + 1e-12));
    }
    assert!(matches!(
        empirical_stieltjes(&s, Complex64::new(0.0, 0.0)),
        Err(SpectraError::NotUpperHalfPlane(_))
    ));
}

#[test]
fn weyl_inequalities_small() {
    let n = 6;
    for seed in 0..20 {
        let a = random_sym(n, 2 * seed);
        let b = random_sym(n, 2 * seed + 1);
        let c = a.add(&b).unwrap();
        let (la, lb, lc) = (jacobi_eigenvalues(&a), jacobi_eigenvalues(&b), jacobi_eigenvalues(&c));
        for i in 0..n {
            for j in 0..n - i {
                assert!(lc[i + j] <= la[i] + lb[j] + 1e-12, "seed {seed} i {i} j {j}");
            }
        }
    }
}

#[test]
fn partial_samples_are_refused() {
    let params = SbmParams::new(200, 2, 0.1, 0.04, 1).unwrap();
    let g = SbmGraph::sample(&params, 1).unwrap();
    let s = sbm_spectra::detect::top_spectrum(&g, 3, false, 1).unwrap();
    assert!(!s.is_complete());
    assert!(matches!(esd_count(&s, -1.0, 1.0), Err(SpectraError::Partial { .. })));
    assert!(matches!(empirical_stieltjes(&s, Complex64::new(0.0, 1.0)), Err(SpectraError::Partial { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dense_solver_matches_jacobi(n in 1usize..14, entries in prop::collection::vec(-5.0f64..5.0, 1..120)) {
        let h = sym_from(n, &entries);
        let s = eigen_sym(&h, true).unwrap();
        let oracle = jacobi_eigenvalues(&h);
        let scale = h.frobenius_norm().max(1.0);
        for (a, b) in s.eigenvalues().iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{} vs {}", a, b);
        }
        let sum: f64 = s.eigenvalues().iter().sum();
        prop_assert!((sum - h.trace()).abs() <= 1e-12 * scale);
        prop_assert!(orthonormality_residual(&s).unwrap() <= 1e-12);
        prop_assert!(reconstruction_residual(&h, &s).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn counts_are_consistent(seed in any::<u64>(), a in -3.0f64..3.0, w in 0.01f64..3.0) {
        let s = eigen_sym(&random_sym(40, seed), false).unwrap();
        let whole = esd_count(&s, a, a + w).unwrap();
        let left = esd_count(&s, a, a + w / 2.0).unwrap();
        let right = esd_count(&s, a + w / 2.0, a + w).unwrap();
        let on_mid = s.eigenvalues().iter().filter(|&&l| l == a + w / 2.0).count() as f64 / 40.0;
        prop_assert!((whole - left - right - on_mid).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&whole));
    }
}
