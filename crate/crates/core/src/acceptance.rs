//! Acceptance suite: fifteen numbered checks combining exact identities of
//! the refined law with calibrated ensemble properties.

use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::detect::{detect_once, DetectionOutcome, DEFAULT_C};
use crate::detlaw::{msc, ComplexPoint, DeterministicLaw, ETA_FLOOR};
use crate::edge::{edge_ensemble, EdgeEnsemble, TwTable, TW1_MEAN};
use crate::model::{bernoulli_centered_cumulant, cumulant_profile, dyson_flow_sample, SbmGraph, SbmParams, SymMatrix};
use crate::oracle;
use crate::rng::{seeded, trial_seed};
use crate::spectra::{delocalization_stat, eigen_sym, resolvent_entry_stats, SampleMeta, SpectralSample};
use crate::verify::{ids_report, median, strong_law_report, weak_law_scan, GridSpec, IDS_MARGIN, STRONG_MARGIN};

pub const CRITERIA: [(u8, &str); 15] = [
    (1, "semicircle degeneration"),
    (2, "quartic residual"),
    (3, "edge asymptotics"),
    (4, "probability measure"),
    (5, "Wald identity"),
    (6, "strong local law"),
    (7, "weak law"),
    (8, "integrated density of states"),
    (9, "norm shift"),
    (10, "edge fluctuation moments"),
    (11, "spectral gap"),
    (12, "detection accuracy"),
    (13, "delocalization"),
    (14, "Dyson flow"),
    (15, "oracle equivalences"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} ({:.1} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.seconds
        )
    }
}

pub fn run(id: u8) -> CriterionResult {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown criterion");
    let start = Instant::now();
    let outcome = match id {
        1 => semicircle_degeneration(),
        2 => quartic_residual(),
        3 => edge_asymptotics(),
        4 => probability_measure(),
        5 => wald_identity(),
        6 => strong_local_law(),
        7 => weak_law(),
        8 => integrated_density(),
        9 => norm_shift(),
        10 => edge_moments(),
        11 => spectral_gap(),
        12 => detection(),
        13 => delocalization(),
        14 => dyson_flow(),
        15 => oracle_equivalences(),
        _ => Err(format!("no criterion {id}")),
    };
    let (pass, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name,
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run(c.0)).collect()
}

type Outcome = Result<(bool, String), String>;

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn max_over<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn grid_points() -> Vec<Complex64> {
    GridSpec::default().points().iter().map(ComplexPoint::z).collect()
}

fn semicircle_degeneration() -> Outcome {
    let law = DeterministicLaw::new(0.0, 10.0, 0.0).map_err(err)?;
    let mut worst: f64 = 0.0;
    let points = grid_points();
    for &z in &points {
        worst = worst.max((law.mtilde(z).map_err(err)? - msc(z)).norm());
    }
    let edge_err = (law.edge() - 2.0).abs();
    Ok((
        worst <= 1e-12 && edge_err <= 1e-10 && points.len() == 252,
        format!("{} points, max |mtilde - msc| = {worst:.2e}, |L - 2| = {edge_err:.2e}", points.len()),
    ))
}

fn quartic_residual() -> Outcome {
    let points = grid_points();
    let mut worst: f64 = 0.0;
    for c4 in [1e-3, 1e-2, 1e-1] {
        let law = DeterministicLaw::from_coefficient(c4).map_err(err)?;
        for &z in &points {
            let m = law.mtilde(z).map_err(err)?;
            worst = worst.max(law.p1(m, z).norm());
        }
    }
    Ok((worst <= 1e-10, format!("max |P1(mtilde)| = {worst:.2e} over 3 x {} points", points.len())))
}

fn edge_asymptotics() -> Outcome {
    let mut ratios = Vec::new();
    for c4 in [0.1, 0.05, 0.025, 0.0125] {
        let law = DeterministicLaw::from_coefficient(c4).map_err(err)?;
        ratios.push((law.edge() - (2.0 + c4)).abs() / (c4 * c4));
    }
    let worst = max_over(ratios.iter().copied());
    Ok((
        worst <= 5.0,
        format!(
            "|L - (2 + c4)| / c4^2 = {}",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn probability_measure() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for c4 in [0.01, 0.1] {
        let law = DeterministicLaw::from_coefficient(c4).map_err(err)?;
        let l = law.edge();
        let mass = law.integrated_density(-l, l).map_err(err)?;
        let mut asym: f64 = 0.0;
        for i in 0..=40 {
            let e = l * i as f64 / 40.0;
            asym = asym.max((law.rho(e, ETA_FLOOR).map_err(err)? - law.rho(-e, ETA_FLOOR).map_err(err)?).abs());
        }
        let mut ratios = Vec::new();
        for i in 0..=30 {
            let gap = 1e-4 * (1e-1f64 / 1e-4).powf(i as f64 / 30.0);
            let e = l - gap;
            ratios.push(law.rho(e, ETA_FLOOR).map_err(err)? / gap.sqrt());
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = max_over(ratios.iter().copied());
        let band = hi / lo;
        pass &= (mass - 1.0).abs() <= 1e-6 && asym <= 1e-10 && lo > 0.0 && band <= 5.0;
        parts.push(format!(
            "c4 = {c4}: mass - 1 = {:.1e}, asymmetry = {asym:.1e}, edge band = {band:.3}",
            mass - 1.0
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn wald_identity() -> Outcome {
    let params = SbmParams::new(200, 2, 0.1, 0.05, 11).map_err(err)?;
    let zs = [
        Complex64::new(0.0, 0.5),
        Complex64::new(-1.2, 0.05),
        Complex64::new(1.9, 0.01),
        Complex64::new(0.7, 1.0),
        Complex64::new(2.5, 0.2),
    ];
    let mut worst: f64 = 0.0;
    for t in 0..20 {
        let h = SbmGraph::sample(&params, trial_seed(params.seed, t)).map_err(err)?.centered();
        for &z in &zs {
            worst = worst.max(resolvent_entry_stats(&h, z, false).map_err(err)?.wald_residual);
        }
    }
    Ok((worst <= 1e-8, format!("max Wald residual = {worst:.2e} over 20 matrices x 5 points")))
}

/// N = 2000, K = 2, p_s = 0.05, p_d = 0.02.
pub fn bulk_params() -> SbmParams {
    SbmParams::new(2000, 2, 0.05, 0.02, 2024).expect("valid parameters")
}

pub const BULK_TRIALS: usize = 20;

struct BulkEnsemble {
    samples: Vec<SpectralSample>,
    deloc: Vec<f64>,
}

/// Full spectra of the bulk ensemble; eigenvectors are reduced to their
/// delocalization statistic and dropped.
fn bulk_ensemble() -> Result<&'static BulkEnsemble, String> {
    static CELL: OnceLock<Result<BulkEnsemble, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let params = bulk_params();
        let rows: Vec<(SpectralSample, f64)> = (0..BULK_TRIALS)
            .into_par_iter()
            .map(|t| {
                let seed = trial_seed(params.seed, t);
                let h = SbmGraph::sample(&params, seed).map_err(err)?.centered();
                let full = eigen_sym(&h, true).map_err(err)?;
                let d = delocalization_stat(&full).map_err(err)?;
                let meta = SampleMeta {
                    params: Some(params),
                    seed: Some(seed),
                    flow_time: 0.0,
                    centered: true,
                };
                Ok((SpectralSample::new(full.order(), full.eigenvalues().to_vec(), None, meta), d))
            })
            .collect::<Result<_, String>>()?;
        let (samples, deloc) = rows.into_iter().unzip();
        Ok(BulkEnsemble { samples, deloc })
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn strong_local_law() -> Outcome {
    let ens = bulk_ensemble()?;
    let report = strong_law_report(&bulk_params(), &GridSpec::default(), &ens.samples, STRONG_MARGIN).map_err(err)?;
    let failing = report.points.iter().filter(|p| !p.pass).count();
    Ok((
        report.summary.pass && report.points.len() == 252,
        format!(
            "{} points, median ratio max = {:.3} (margin {STRONG_MARGIN}), {failing} failing",
            report.points.len(),
            report.summary.max_ratio
        ),
    ))
}

/// z-points of the weak-law check.
pub fn weak_points() -> Vec<ComplexPoint> {
    [(0.3, 0.1), (-1.0, 0.05), (1.5, 0.2), (0.0, 0.5), (1.9, 0.05)]
        .into_iter()
        .map(|(energy, eta)| ComplexPoint { energy, eta })
        .collect()
}

fn weak_law() -> Outcome {
    let params = SbmParams::new(1000, 2, 0.05, 0.02, 77).map_err(err)?;
    let report = weak_law_scan(&params, &weak_points(), 20, None).map_err(err)?;
    let fails: Vec<String> = report
        .points
        .iter()
        .map(|p| format!("{}", p.failing_trials.len()))
        .collect();
    Ok((
        report.summary.pass,
        format!(
            "margin N^0.2 = {:.3}, failing trials per point = [{}] (at most 2 allowed)",
            report.margin,
            fails.join(", ")
        ),
    ))
}

fn integrated_density() -> Outcome {
    let ens = bulk_ensemble()?;
    let report = ids_report(&bulk_params(), &[(1.8, 2.2)], &ens.samples, IDS_MARGIN).map_err(err)?;
    let p = &report.points[0];
    Ok((
        p.pass,
        format!(
            "median residual = {:.3e}, bound = {:.3e}, ratio = {:.3} (margin {IDS_MARGIN})",
            p.residual, p.bound, p.ratio
        ),
    ))
}

/// Edge-figure ensemble: K = 3, p_s = 0.03, p_d = 0.01 at the largest
/// N ≤ 4000 divisible by 3.
pub fn edge_params() -> SbmParams {
    SbmParams::new(crate::config::DESK_EDGE_N, 3, 0.03, 0.01, 4000).expect("valid parameters")
}

pub const EDGE_TRIALS: usize = 100;

fn shared_edge() -> Result<&'static EdgeEnsemble, String> {
    static CELL: OnceLock<Result<EdgeEnsemble, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let params = edge_params();
        let profile = cumulant_profile(&params).map_err(err)?;
        let law = DeterministicLaw::from_profile(&profile, 0.0).map_err(err)?;
        edge_ensemble(&params, EDGE_TRIALS, &law).map_err(err)
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn norm_shift() -> Outcome {
    let ens = shared_edge()?;
    let q = cumulant_profile(&ens.params).map_err(err)?.q;
    let n = ens.params.n_vertices as f64;
    let norms = ens.norms();
    let med_l = median(&norms.iter().map(|x| (x - ens.edge).abs()).collect::<Vec<_>>());
    let med_2 = median(&norms.iter().map(|x| (x - 2.0).abs()).collect::<Vec<_>>());
    let bound = 10.0 * (q.powi(-4) + n.powf(-2.0 / 3.0));
    Ok((
        med_l < med_2 && med_l <= bound,
        format!(
            "N = {}, L = {:.5}, median |norm - L| = {med_l:.4e}, median |norm - 2| = {med_2:.4e}, bound = {bound:.4e}",
            ens.params.n_vertices, ens.edge
        ),
    ))
}

fn edge_moments() -> Outcome {
    let ens = shared_edge()?;
    let s = ens.summary(TwTable::embedded()).map_err(err)?;
    let dl = (s.mean_l - TW1_MEAN).abs();
    let d2 = (s.mean_2 - TW1_MEAN).abs();
    Ok((
        dl < d2 && s.ks_l < s.ks_2,
        format!(
            "mean_L = {:.4}, mean_2 = {:.4} (TW1 mean {TW1_MEAN}), KS_L = {:.4}, KS_2 = {:.4}",
            s.mean_l, s.mean_2, s.ks_l, s.ks_2
        ),
    ))
}

pub const DETECT_TRIALS: usize = 20;

/// Figure 2 parameters: N = 3000, p_s = 0.03, p_d = 0.01, given K.
pub fn gap_params(k: usize) -> SbmParams {
    SbmParams::new(3000, k, 0.03, 0.01, 3000).expect("valid parameters")
}

struct DetectRuns {
    k3: Vec<DetectionOutcome>,
    k6: Vec<DetectionOutcome>,
}

fn detect_runs() -> Result<&'static DetectRuns, String> {
    static CELL: OnceLock<Result<DetectRuns, String>> = OnceLock::new();
    CELL.get_or_init(|| {
        let run = |k: usize, partition: bool| -> Result<Vec<DetectionOutcome>, String> {
            let params = gap_params(k);
            (0..DETECT_TRIALS)
                .into_par_iter()
                .map(|t| detect_once(&params, trial_seed(params.seed, t), DEFAULT_C, partition).map_err(err))
                .collect()
        };
        Ok(DetectRuns {
            k3: run(3, true)?,
            k6: run(6, false)?,
        })
    })
    .as_ref()
    .map_err(Clone::clone)
}

fn spectral_gap() -> Outcome {
    let runs = detect_runs()?;
    let count_ok = |v: &[DetectionOutcome], k: usize| v.iter().filter(|o| o.k_hat == k).count();
    let gap_ok = |v: &[DetectionOutcome]| v.iter().filter(|o| o.gap_report.pass).count();
    let ordered = runs
        .k3
        .iter()
        .zip(&runs.k6)
        .filter(|(a, b)| a.gap_report.gap > b.gap_report.gap)
        .count();
    let min_gap = |v: &[DetectionOutcome]| v.iter().map(|o| o.gap_report.gap).fold(f64::INFINITY, f64::min);
    let n = DETECT_TRIALS;
    let pass = count_ok(&runs.k3, 3) == n
        && count_ok(&runs.k6, 6) == n
        && gap_ok(&runs.k3) == n
        && gap_ok(&runs.k6) == n
        && ordered == n;
    Ok((
        pass,
        format!(
            "outliers = K in {}/{n} (K=3), {}/{n} (K=6); gap check {}/{n}, {}/{n}; min gap {:.3}, {:.3}; gap(3) > gap(6) in {ordered}/{n}",
            count_ok(&runs.k3, 3),
            count_ok(&runs.k6, 6),
            gap_ok(&runs.k3),
            gap_ok(&runs.k6),
            min_gap(&runs.k3),
            min_gap(&runs.k6)
        ),
    ))
}

fn detection() -> Outcome {
    let runs = detect_runs()?;
    let acc: Vec<f64> = runs.k3.iter().map(|o| o.accuracy.unwrap_or(0.0)).collect();
    let good = acc.iter().filter(|&&a| a >= 0.95).count();
    let worst = acc.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((
        good >= 18,
        format!("accuracy >= 0.95 in {good}/{DETECT_TRIALS} trials (need 18), min accuracy {worst:.4}"),
    ))
}

fn delocalization() -> Outcome {
    let ens = bulk_ensemble()?;
    let n = bulk_params().n_vertices as f64;
    let bound = n.powf(-0.5 + 0.15);
    let good = ens.deloc.iter().filter(|&&d| d <= bound).count();
    Ok((
        good >= 18,
        format!(
            "max |u|_inf <= N^-0.35 = {bound:.4} in {good}/{BULK_TRIALS} trials (need 18); median stat {:.4}",
            median(&ens.deloc)
        ),
    ))
}

fn upper_entries(h: &SymMatrix) -> Vec<f64> {
    let n = h.order();
    let mut v = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        v.extend_from_slice(&h.row(i)[i + 1..]);
    }
    v
}

fn dyson_flow() -> Outcome {
    // 450·449/2 ≈ 10⁵ identically distributed entries.
    let params = SbmParams::new(450, 1, 0.05, 0.05, 14).map_err(err)?;
    let profile = cumulant_profile(&params).map_err(err)?;
    let h0 = SbmGraph::sample(&params, params.seed).map_err(err)?.centered();
    let t = 2.0;
    let flow = dyson_flow_sample(&h0, t, 0xd150, &profile, &params).map_err(err)?;
    let n = params.n_vertices as f64;
    let x0 = upper_entries(&h0);
    let xt = upper_entries(&flow.matrix);
    let (_, k4_0) = oracle::sample_cumulants(&x0);
    let (k2_t, k4_t) = oracle::sample_cumulants(&xt);
    let var_exact = profile.entry_variance(true);
    let var_dev = ((k2_t - var_exact) / var_exact).abs();
    let q_err = (flow.q_t - profile.q * (0.5 * t).exp()).abs() / flow.q_t;
    let c4_err = (flow.c4_t - profile.c4() * (-2.0 * t).exp()).abs();
    // Normalised fourth cumulant N q_t² κ⁽⁴⁾ at both times.
    let s4_0 = n * profile.q.powi(2) * k4_0;
    let s4_t = n * flow.q_t.powi(2) * k4_t;
    let decay = s4_t / s4_0;
    let expected = (-t).exp();
    let rel = (decay / expected - 1.0).abs();
    let pass = var_dev <= 0.02 && q_err <= 1e-14 && c4_err <= 1e-15 && flow.zeta_t == profile.zeta && rel <= 0.5;
    Ok((
        pass,
        format!(
            "{} draws: variance deviation {:.2e}, q_t rel err {q_err:.1e}, normalised k4 ratio {decay:.4} vs e^-t = {expected:.4} ({:.0}% off)",
            x0.len(),
            var_dev,
            100.0 * rel
        ),
    ))
}

fn oracle_equivalences() -> Outcome {
    let mut rng = seeded(15);
    let h = SymMatrix::from_upper(50, |_, _| rng.random_range(-1.0..1.0));
    let dense = eigen_sym(&h, false).map_err(err)?;
    let jac = oracle::jacobi_eigenvalues(&h);
    let eig_err = max_over(dense.eigenvalues().iter().zip(&jac).map(|(a, b)| (a - b).abs()));

    let c4s = [1e-3, 1e-2, 0.05, 0.1, 0.2];
    let mut law_err: f64 = 0.0;
    for i in 0..100 {
        let c4 = c4s[i % c4s.len()];
        let z = Complex64::new(rng.random_range(-2.9..2.9), rng.random_range(0.01..3.0));
        let law = DeterministicLaw::from_coefficient(c4).map_err(err)?;
        let m = law.mtilde(z).map_err(err)?;
        law_err = law_err.max((m - oracle::mtilde_oracle(c4, z)).norm());
    }

    let mut cum_err: f64 = 0.0;
    for p in [0.01, 0.1, 0.5, 0.9] {
        for sigma in [0.5, 1.0, 7.0] {
            let reference = oracle::two_point_cumulants(p, sigma);
            for k in 2..=4u32 {
                let v = bernoulli_centered_cumulant(p, sigma, k).map_err(err)?;
                let r = reference[k as usize - 1];
                cum_err = cum_err.max((v - r).abs() / r.abs().max(1.0));
            }
        }
    }
    Ok((
        eig_err <= 1e-9 && law_err <= 1e-10 && cum_err <= 1e-12,
        format!("eigenvalues vs Jacobi {eig_err:.1e}, mtilde vs high-precision roots {law_err:.1e}, cumulants vs moments {cum_err:.1e}"),
    ))
}
