use num_complex::Complex64;
use proptest::prelude::*;
use sbm_spectra::detlaw::{msc, DeterministicLaw, LawError, MAX_C4, MIN_C4};
use sbm_spectra::oracle::{edge_double_root, mtilde_oracle};

fn halton(i: usize, base: usize) -> f64 {
    let (mut f, mut r, mut k) = (1.0, 0.0, i);
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// Halton points in ℰ, bounded away from η = 0 and the corners.
fn domain_points(n: usize) -> Vec<Complex64> {
    (1..=n)
        .map(|i| Complex64::new(-2.95 + 5.9 * halton(i, 2), 1e-3 + 2.999 * halton(i, 3)))
        .collect()
}

#[test]
fn stieltjes_positivity() {
    for c4 in [0.0, 1e-3, 1e-2, 1e-1] {
        let law = DeterministicLaw::from_coefficient(c4).unwrap();
        for z in domain_points(200) {
            let m = law.mtilde(z).unwrap();
            assert!(m.im > 0.0, "c4 {c4} z {z}: {m}");
            assert!(m.norm() <= 1.0 / z.im + 1e-12);
        }
    }
}

#[test]
fn reflection_symmetry() {
    let law = DeterministicLaw::from_coefficient(0.08).unwrap();
    for z in domain_points(100) {
        let a = law.mtilde(z).unwrap();
        let b = law.mtilde(Complex64::new(-z.re, z.im)).unwrap();
        assert!((a + b.conj()).norm() < 1e-12, "{z}: {a} vs {b}");
    }
    for e in [0.0, 0.7, 1.5, 2.05] {
        let r1 = law.rho(e, 1e-9).unwrap();
        let r2 = law.rho(-e, 1e-9).unwrap();
        assert!((r1 - r2).abs() < 1e-10);
    }
}

#[test]
fn semicircle_limit() {
    let z = domain_points(60);
    for c4 in [1e-2, 1e-3, 1e-4] {
        let law = DeterministicLaw::from_coefficient(c4).unwrap();
        for &p in &z {
            let d = (law.mtilde(p).unwrap() - msc(p)).norm();
            assert!(d <= 10.0 * c4, "c4 {c4} z {p}: {d}");
        }
    }
}

#[test]
fn matches_high_precision_oracle() {
    for c4 in [1e-3, 0.01, 0.05, 0.2] {
        let law = DeterministicLaw::from_coefficient(c4).unwrap();
        for z in domain_points(50).into_iter().chain([Complex64::new(0.0, 0.5)]) {
            let m = law.mtilde(z).unwrap();
            let o = mtilde_oracle(c4, z);
            assert!((m - o).norm() <= 1e-12 * o.norm().max(1.0), "c4 {c4} z {z}: {m} vs {o}");
        }
    }
    let m = DeterministicLaw::from_coefficient(0.01).unwrap().mtilde(Complex64::new(0.0, 0.5)).unwrap();
    assert!(m.re.abs() < 1e-14);
}

#[test]
fn edge_matches_double_root() {
    for c4 in [MIN_C4, -0.01, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, MAX_C4] {
        let law = DeterministicLaw::from_coefficient(c4).unwrap();
        let oracle = edge_double_root(c4).unwrap();
        assert!((law.edge() - oracle).abs() < 1e-9, "c4 {c4}: {} vs {oracle}", law.edge());
    }
}

#[test]
fn square_root_behaviour_at_edge() {
    let law = DeterministicLaw::from_coefficient(0.05).unwrap();
    let l = law.edge();
    let eta = 1e-9;
    let kappas = [1e-2, 4e-3, 1e-3];
    let ratios: Vec<f64> = kappas
        .iter()
        .map(|&k| law.mtilde(Complex64::new(l - k, eta)).unwrap().im / (k + eta).sqrt())
        .collect();
    for r in &ratios {
        assert!(*r > 0.0);
        assert!((r / ratios[2] - 1.0).abs() < 0.1, "{ratios:?}");
    }
}

#[test]
fn unit_mass() {
    for c4 in [0.0, 0.02, 0.2] {
        let law = DeterministicLaw::from_coefficient(c4).unwrap();
        let mass = law.integrated_density(-4.0, 4.0).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "c4 {c4}: {mass}");
        let half = law.integrated_density(0.0, 4.0).unwrap();
        assert!((half - 0.5).abs() < 1e-6);
    }
}

#[test]
fn rejects_bad_input() {
    assert!(matches!(DeterministicLaw::from_coefficient(0.3), Err(LawError::UnsupportedCoefficient(_))));
    assert!(matches!(DeterministicLaw::new(1.0, 0.0, 0.0), Err(LawError::InvalidParameter(_))));
    let law = DeterministicLaw::from_coefficient(0.1).unwrap();
    assert!(law.mtilde(Complex64::new(3.5, 0.1)).is_err());
    assert!(law.mtilde(Complex64::new(0.0, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quartic_residual_vanishes(c4 in 1e-4f64..MAX_C4, e in -2.9f64..2.9, eta in 1e-3f64..3.0) {
        let law = DeterministicLaw::from_coefficient(c4).unwrap();
        let z = Complex64::new(e, eta);
        let m = law.mtilde(z).unwrap();
        prop_assert!(m.im > 0.0);
        prop_assert!(law.p1(m, z).norm() < 1e-10);
    }

    #[test]
    fn edge_grows_with_coefficient(a in MIN_C4..MAX_C4, b in MIN_C4..MAX_C4) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let l1 = DeterministicLaw::from_coefficient(lo).unwrap().edge();
        let l2 = DeterministicLaw::from_coefficient(hi).unwrap().edge();
        prop_assert!(l1 < l2);
    }

    #[test]
    fn flow_only_enters_through_coefficient(xi4 in 0.0f64..2.0, q in 3.0f64..20.0, t in 0.0f64..3.0) {
        let flowed = DeterministicLaw::new(xi4, q, t).unwrap();
        let direct = DeterministicLaw::from_coefficient((-2.0 * t).exp() * xi4 / (q * q)).unwrap();
        prop_assert!((flowed.edge() - direct.edge()).abs() < 1e-11);
        let z = Complex64::new(0.4, 0.2);
        prop_assert!((flowed.mtilde(z).unwrap() - direct.mtilde(z).unwrap()).norm() < 1e-13);
    }
}
