use proptest::prelude::*;
use sbm_spectra::model::{
    bernoulli_centered_cumulant, center_rescale, cumulant_profile, dyson_flow_sample, sample_adjacency, SampleOptions,
    SbmGraph, SbmParams, SymMatrix,
};
use sbm_spectra::oracle::{sample_cumulants, two_point_cumulants};

fn upper(h: &SymMatrix, labels: &[usize], same: bool) -> Vec<f64> {
    let n = h.order();
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (labels[i] == labels[j]) == same {
                v.push(h.get(i, j));
            }
        }
    }
    v
}

#[test]
fn cumulants_match_moment_enumeration() {
    for p in [0.01, 0.1, 0.5, 0.9] {
        for sigma in [0.5, 1.0, 7.0] {
            let oracle = two_point_cumulants(p, sigma);
            assert!(oracle[0].abs() < 1e-15);
            for k in 2..=4u32 {
                let v = bernoulli_centered_cumulant(p, sigma, k).unwrap();
                let r = oracle[k as usize - 1];
                assert!((v - r).abs() <= 1e-12 * r.abs().max(1.0), "p {p} sigma {sigma} k {k}: {v} vs {r}");
            }
        }
    }
}

#[test]
fn row_variance_normalisation() {
    let params = SbmParams::new(500, 2, 0.1, 0.04, 3).unwrap();
    let mut total = 0.0;
    for t in 0..100 {
        let h = SbmGraph::sample(&params, t).unwrap().centered();
        let s: f64 = h.as_slice().iter().map(|x| x * x).sum();
        total += s / 500.0;
    }
    let mean = total / 100.0;
    assert!((mean - 1.0).abs() < 0.05, "{mean}");
}

#[test]
fn centred_block_means_vanish() {
    let params = SbmParams::new(600, 3, 0.08, 0.02, 9).unwrap();
    let a = sample_adjacency(&params, 9, SampleOptions::default()).unwrap();
    let h = center_rescale(&a, &params).unwrap();
    let labels = params.labels();
    for same in [true, false] {
        let x = upper(&h, &labels, same);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 * (var / n).sqrt(), "same {same}: mean {mean}");
    }
    assert_eq!(h.as_slice(), SbmGraph::sample(&params, 9).unwrap().centered().as_slice());
}

#[test]
fn dyson_flow_preserves_variance() {
    let params = SbmParams::new(640, 2, 0.06, 0.02, 21).unwrap();
    let profile = cumulant_profile(&params).unwrap();
    let labels = params.labels();
    let h0 = SbmGraph::sample(&params, 21).unwrap().centered();
    let base = upper(&h0, &labels, true);
    assert!(base.len() >= 100_000);
    let (v0, _) = sample_cumulants(&base);
    for t in [0.5, 2.0] {
        let flow = dyson_flow_sample(&h0, t, 77, &profile, &params).unwrap();
        let x = upper(&flow.matrix, &labels, true);
        let (vt, _) = sample_cumulants(&x);
        let n = x.len() as f64;
        let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n;
        let se = ((m4 - vt * vt) / n).sqrt();
        assert!((vt - v0).abs() < 3.0 * se * 2f64.sqrt(), "t {t}: {vt} vs {v0} (se {se})");
        assert!((flow.q_t - profile.q * (0.5 * t).exp()).abs() <= 1e-12 * flow.q_t);
        assert_eq!(flow.zeta_t, profile.zeta);
    }
}

#[test]
fn long_flow_is_gaussian() {
    let params = SbmParams::new(450, 1, 0.05, 0.05, 5).unwrap();
    let profile = cumulant_profile(&params).unwrap();
    let labels = params.labels();
    let h0 = SbmGraph::sample(&params, 5).unwrap().centered();
    let flow = dyson_flow_sample(&h0, 50.0, 3, &profile, &params).unwrap();
    let x = upper(&flow.matrix, &labels, true);
    let (k2, k4) = sample_cumulants(&x);
    let var = profile.entry_variance(true);
    assert!((k2 - var).abs() < 0.02 * var);
    // Excess kurtosis of a Gaussian sample of size 10⁵ has sd ≈ √(24/n) ≈ 0.015.
    assert!((k4 / (k2 * k2)).abs() < 0.08, "{}", k4 / (k2 * k2));
}

#[test]
fn erdos_renyi_profile() {
    let n = 1000;
    let p = 0.02;
    let params = SbmParams::new(n, 1, p, p, 0).unwrap();
    let prof = cumulant_profile(&params).unwrap();
    let sigma = params.sigma();
    let k2 = bernoulli_centered_cumulant(p, sigma, 2).unwrap();
    let k4 = bernoulli_centered_cumulant(p, sigma, 4).unwrap();
    assert!((prof.q - (k2 / k4).sqrt()).abs() < 1e-12 * prof.q);
    assert!((prof.xi4 - n as f64 * prof.q * prof.q * k4).abs() < 1e-12);
    let approx = ((n as f64) * p * (1.0 - p) / (1.0 - 6.0 * p + 6.0 * p * p)).sqrt();
    assert!((prof.q - approx).abs() < 1e-9 * approx);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), k in 1usize..4) {
        let params = SbmParams::new(60 * k, k, 0.3, 0.1, seed).unwrap();
        let a = SbmGraph::sample(&params, seed).unwrap();
        let b = SbmGraph::sample(&params, seed).unwrap();
        let m = a.adjacency();
        let m2 = b.adjacency();
        prop_assert_eq!(m.as_slice(), m2.as_slice());
        for i in 0..m.order() {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..i {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn profile_rows_sum_to_one(k in 1usize..6, ps in 0.01f64..0.5, pd in 0.01f64..0.5) {
        let params = SbmParams::new(120 * k.max(1), k, ps, pd, 0).unwrap();
        let prof = cumulant_profile(&params).unwrap();
        prop_assert!((prof.row_variance_sum() - 1.0).abs() < 1e-12);
        prop_assert!(prof.q > 0.0 && prof.q <= (params.n_vertices as f64).sqrt() + 1e-12);
        prop_assert!((prof.c4() - prof.xi4 / (prof.q * prof.q)).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_oracle(p in 0.001f64..0.999, sigma in 0.1f64..10.0) {
        let oracle = two_point_cumulants(p, sigma);
        for k in 2..=4u32 {
            let v = bernoulli_centered_cumulant(p, sigma, k).unwrap();
            let r = oracle[k as usize - 1];
            prop_assert!((v - r).abs() <= 1e-12 * sigma.powi(-(k as i32)));
        }
    }
}
