use proptest::prelude::*;
use sbm_spectra::detlaw::ComplexPoint;
use sbm_spectra::model::{cumulant_profile, SbmParams};
use sbm_spectra::verify::{
    ensemble_spectra, ids_compare, ids_report, linspace, logspace, matrix_norm_check, median, psi, strong_bound,
    strong_law_report, strong_law_scan, weak_law_scan, DomainCheck, GridSpec, VerificationReport, VerifyError,
    IDS_MARGIN, NORM_MARGIN, STRONG_MARGIN,
};

fn params() -> SbmParams {
    SbmParams::new(400, 2, 0.08, 0.03, 31).unwrap()
}

fn small_grid() -> GridSpec {
    GridSpec {
        energies: linspace(-2.0, 2.0, 5),
        etas: logspace(-1.5, 0.0, 3),
        domain: DomainCheck::Bulk,
    }
}

#[test]
fn strong_scan_bounds_are_recomputable() {
    let p = params();
    let report = strong_law_scan(&p, &small_grid(), 4, STRONG_MARGIN).unwrap();
    let q = cumulant_profile(&p).unwrap().q;
    assert_eq!(report.q, q);
    assert_eq!(report.points.len(), 15);
    for rec in &report.points {
        let eta = rec.z[1];
        let expected = 1.0 / (q * q) + 1.0 / (400.0 * eta);
        assert!((rec.bound - expected).abs() <= 1e-15 * expected);
        assert_eq!(rec.bound, strong_bound(q, 400, eta));
        assert_eq!(rec.trial_ratios.len(), 4);
        assert_eq!(rec.ratio, median(&rec.trial_ratios));
        assert_eq!(rec.pass, rec.ratio <= STRONG_MARGIN);
    }
    assert!(report.summary.pass, "{}", report.to_json());
}

#[test]
fn scans_are_deterministic() {
    let p = params();
    let a = strong_law_scan(&p, &small_grid(), 3, STRONG_MARGIN).unwrap();
    let b = strong_law_scan(&p, &small_grid(), 3, STRONG_MARGIN).unwrap();
    assert_eq!(a, b);
    let samples = ensemble_spectra(&p, 3, false).unwrap();
    assert_eq!(strong_law_report(&p, &small_grid(), &samples, STRONG_MARGIN).unwrap(), a);
}

#[test]
fn report_json_round_trip() {
    let report = ids_compare(&params(), &[(-1.0, 0.0), (0.5, 1.5)], 3, IDS_MARGIN).unwrap();
    let back: VerificationReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn ids_scan_passes_and_predicts() {
    let p = params();
    let intervals = [(-2.0, -1.0), (-0.5, 0.5), (1.0, 2.5)];
    let samples = ensemble_spectra(&p, 4, false).unwrap();
    let report = ids_report(&p, &intervals, &samples, IDS_MARGIN).unwrap();
    for (rec, (a, b)) in report.points.iter().zip(intervals) {
        let pred = rec.prediction.unwrap();
        assert!(pred > 0.0 && pred < 1.0);
        let q = report.q;
        assert!((rec.bound - ((b - a) / (q * q) + 1.0 / 400.0)).abs() < 1e-15);
    }
    assert!(report.summary.pass, "{}", report.to_json());
}

#[test]
fn weak_scan_small() {
    let p = SbmParams::new(300, 3, 0.1, 0.04, 8).unwrap();
    let z = [ComplexPoint::new(0.0, 0.5).unwrap(), ComplexPoint::new(1.2, 0.2).unwrap()];
    let report = weak_law_scan(&p, &z, 5, None).unwrap();
    assert!((report.margin - 300f64.powf(0.2)).abs() < 1e-12);
    for (rec, zp) in report.points.iter().zip(&z) {
        assert_eq!(rec.psi, Some(psi(report.q, 300, zp.eta)));
        assert!(rec.lambda_o.unwrap() > 0.0);
    }
    assert!(report.summary.pass, "{}", report.to_json());
}

#[test]
fn norm_scan_records_both_centrings() {
    let p = SbmParams::new(600, 3, 0.05, 0.02, 2).unwrap();
    let report = matrix_norm_check(&p, 6, NORM_MARGIN).unwrap();
    assert_eq!(report.points.len(), 1);
    assert_eq!(report.points[0].z[1], 2.0);
    assert_eq!(report.notes.len(), 1);
}

#[test]
fn domain_violations_are_rejected() {
    let p = params();
    let bad_eta = GridSpec {
        energies: vec![0.0],
        etas: vec![0.0],
        domain: DomainCheck::Bulk,
    };
    assert!(matches!(strong_law_scan(&p, &bad_eta, 1, 1.0), Err(VerifyError::Domain(_))));
    let bad_energy = GridSpec {
        energies: vec![3.0],
        etas: vec![0.5],
        domain: DomainCheck::Bulk,
    };
    assert!(matches!(strong_law_scan(&p, &bad_energy, 1, 1.0), Err(VerifyError::Domain(_))));
    let local = GridSpec {
        energies: vec![0.0],
        etas: vec![1e-3],
        domain: DomainCheck::Local { ell: 0.3 },
    };
    assert!(local.validate(400).is_err());
    assert!(local.clipped(400).validate(400).is_err());
    let tiny = [ComplexPoint::new(0.0, 1e-3).unwrap()];
    assert!(matches!(weak_law_scan(&p, &tiny, 1, None), Err(VerifyError::Domain(_))));
    assert!(matches!(ids_compare(&p, &[(1.0, 0.5)], 1, 1.0), Err(VerifyError::Domain(_))));
    assert!(matches!(strong_law_scan(&p, &small_grid(), 0, 1.0), Err(VerifyError::NoTrials)));
    let big = SbmParams::new(2002, 2, 0.05, 0.02, 0).unwrap();
    let z = [ComplexPoint::new(0.0, 1.0).unwrap()];
    assert!(matches!(weak_law_scan(&big, &z, 1, None), Err(VerifyError::SizeGuard(2002))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn median_is_order_free(x in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let m = median(&x);
        let mut r = x.clone();
        r.reverse();
        prop_assert_eq!(m, median(&r));
        let below = x.iter().filter(|&&v| v < m).count();
        let above = x.iter().filter(|&&v| v > m).count();
        prop_assert!(below <= x.len() / 2 && above <= x.len() / 2);
    }

    #[test]
    fn grids_enumerate_every_pair(ne in 1usize..12, nh in 1usize..12, n in 100usize..5000) {
        let g = GridSpec {
            energies: linspace(-3.5, 3.5, ne),
            etas: logspace(-4.0, 0.6, nh),
            domain: DomainCheck::Local { ell: 0.3 },
        };
        prop_assert_eq!(g.points().len(), ne * nh);
        let c = g.clipped(n);
        prop_assert!(c.points().len() <= ne * nh);
        if !c.points().is_empty() {
            prop_assert!(c.validate(n).is_ok());
        }
    }

    #[test]
    fn bounds_decrease_with_q(q in 1.0f64..50.0, n in 10usize..10_000, eta in 1e-3f64..3.0) {
        prop_assert!(strong_bound(q * 1.1, n, eta) < strong_bound(q, n, eta));
        prop_assert!(psi(q * 1.1, n, eta) < psi(q, n, eta));
        prop_assert_eq!(strong_bound(q, n, eta), 1.0 / (q * q) + 1.0 / (n as f64 * eta));
    }
}
