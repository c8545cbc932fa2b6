//! Monte-Carlo checks of the local laws, the integrated density of states
//! and the norm bound.
//!
//! Stochastic domination `X ≺ Y` is tested as "median over trials of `X/Y`
//! is at most a fixed margin", or, for the weak law, "`X ≤ margin·Y` in at
//! least 90% of trials".

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detlaw::{msc, ComplexPoint, DeterministicLaw, LawError};
use crate::edge::{edge_ensemble, EdgeEnsemble, EdgeError};
use crate::model::{cumulant_profile, ModelError, SbmGraph, SbmParams};
use crate::rng::trial_seed;
use crate::spectra::{
    eigen_sym, esd_count, resolvent_entry_stats, stieltjes_of, SampleMeta, SpectraError, SpectralSample,
    RESOLVENT_SIZE_GUARD,
};

pub const STRONG_MARGIN: f64 = 10.0;
pub const IDS_MARGIN: f64 = 5.0;
pub const NORM_MARGIN: f64 = 10.0;
/// Fraction of trials that must satisfy the weak-law bounds.
pub const WEAK_PASS_FRACTION: f64 = 0.9;
/// ℓ of the domain 𝒟_ℓ used for weak-law spectral parameters.
pub const DEFAULT_ELL: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("grid violates {0}")]
    Domain(String),
    #[error("need at least one trial")]
    NoTrials,
    #[error("dense resolvent scans are limited to N <= {RESOLVENT_SIZE_GUARD}, got N = {0}")]
    SizeGuard(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Edge(#[from] EdgeError),
}

/// Domain restriction applied to a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainCheck {
    /// ℰ = {|E| < 3, 0 < η ≤ 3}
    Bulk,
    /// 𝒟_ℓ: additionally η > N^{−1+ℓ}
    Local { ell: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub energies: Vec<f64>,
    pub etas: Vec<f64>,
    #[serde(default = "default_domain")]
    pub domain: DomainCheck,
}

fn default_domain() -> DomainCheck {
    DomainCheck::Bulk
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a, b, n).into_iter().map(|x| 10f64.powf(x)).collect()
}

impl Default for GridSpec {
    /// E ∈ linspace(−2.5, 2.5, 21), η ∈ logspace(−2, 0.3, 12).
    fn default() -> Self {
        Self {
            energies: linspace(-2.5, 2.5, 21),
            etas: logspace(-2.0, 0.3, 12),
            domain: DomainCheck::Bulk,
        }
    }
}

impl GridSpec {
    /// All `(E, η)` pairs, energies varying fastest.
    pub fn points(&self) -> Vec<ComplexPoint> {
        let mut out = Vec::with_capacity(self.energies.len() * self.etas.len());
        for &eta in &self.etas {
            for &energy in &self.energies {
                out.push(ComplexPoint { energy, eta });
            }
        }
        out
    }

    /// Checks every point against the configured domain for matrices of
    /// order `n`.
    pub fn validate(&self, n: usize) -> Result<(), VerifyError> {
        if self.energies.is_empty() || self.etas.is_empty() {
            return Err(VerifyError::Domain("grid is empty".into()));
        }
        for p in self.points() {
            check_point(p, self.domain, n)?;
        }
        Ok(())
    }

    /// Drops the points outside the configured domain.
    pub fn clipped(&self, n: usize) -> GridSpec {
        let keep_eta = |eta: f64| check_point(ComplexPoint { energy: 0.0, eta }, self.domain, n).is_ok();
        GridSpec {
            energies: self.energies.iter().copied().filter(|e| e.abs() < 3.0).collect(),
            etas: self.etas.iter().copied().filter(|&eta| keep_eta(eta)).collect(),
            domain: self.domain,
        }
    }
}

fn check_point(p: ComplexPoint, domain: DomainCheck, n: usize) -> Result<(), VerifyError> {
    if !(p.eta > 0.0) {
        return Err(VerifyError::Domain(format!("eta > 0 (got eta = {})", p.eta)));
    }
    if !(p.energy.abs() < 3.0 && p.eta <= 3.0) {
        return Err(VerifyError::Domain(format!(
            "|E| < 3 and eta <= 3 (got E = {}, eta = {})",
            p.energy, p.eta
        )));
    }
    if let DomainCheck::Local { ell } = domain {
        let floor = (n as f64).powf(-1.0 + ell);
        if !(p.eta > floor) {
            return Err(VerifyError::Domain(format!(
                "eta > N^(-1+{ell}) = {floor:.3e} (got eta = {})",
                p.eta
            )));
        }
    }
    Ok(())
}

/// One grid point (or interval) of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    /// `[E, η]`; `[E1, E2]` for interval scans and `[L, 2]` for the norm scan.
    pub z: [f64; 2],
    /// Median residual over trials.
    pub residual: f64,
    pub bound: f64,
    /// Median of per-trial residual/bound.
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_o: Option<f64>,
    /// Median of `|m − m_sc|` and its bound `1/√q + (Nη)^{−1/3}` (weak scans).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msc_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msc_bound: Option<f64>,
    /// Deterministic prediction the residual is measured against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<f64>,
    pub trial_ratios: Vec<f64>,
    pub failing_trials: Vec<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scan: String,
    pub params: SbmParams,
    pub margin: f64,
    pub trials: usize,
    pub q: f64,
    pub points: Vec<PointRecord>,
    pub summary: Summary,
    /// Scan-specific findings (e.g. the norm scan's centring comparison).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn assemble(scan: &str, params: &SbmParams, margin: f64, trials: usize, q: f64, points: Vec<PointRecord>) -> Self {
        let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
        let summary = Summary {
            median_ratio: median(&ratios),
            max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            pass: points.iter().all(|p| p.pass),
        };
        Self {
            scan: scan.to_string(),
            params: *params,
            margin,
            trials,
            q,
            points,
            summary,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Strong-law bound `1/q² + 1/(Nη)`.
pub fn strong_bound(q: f64, n: usize, eta: f64) -> f64 {
    1.0 / (q * q) + 1.0 / (n as f64 * eta)
}

/// `ψ(z) = 1/q + 1/√(Nη)`.
pub fn psi(q: f64, n: usize, eta: f64) -> f64 {
    1.0 / q + 1.0 / (n as f64 * eta).sqrt()
}

/// Dense spectra of `trials` centred samples, seeds `seed ⊕ trial`.
pub fn ensemble_spectra(params: &SbmParams, trials: usize, want_vectors: bool) -> Result<Vec<SpectralSample>, VerifyError> {
    if trials == 0 {
        return Err(VerifyError::NoTrials);
    }
    params.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(params.seed, t);
            let h = SbmGraph::sample(params, seed)?.centered();
            let meta = SampleMeta {
                params: Some(*params),
                seed: Some(seed),
                flow_time: 0.0,
                centered: true,
            };
            Ok(eigen_sym(&h, want_vectors)?.with_meta(meta))
        })
        .collect()
}

/// |m(z) − m̃(z)| against `1/q² + 1/(Nη)` over `grid`, one eigendecomposition
/// per trial.
pub fn strong_law_scan(
    params: &SbmParams,
    grid: &GridSpec,
    trials: usize,
    margin: f64,
) -> Result<VerificationReport, VerifyError> {
    grid.validate(params.n_vertices)?;
    let samples = ensemble_spectra(params, trials, false)?;
    strong_law_report(params, grid, &samples, margin)
}

/// Strong-law report from precomputed spectra.
pub fn strong_law_report(
    params: &SbmParams,
    grid: &GridSpec,
    samples: &[SpectralSample],
    margin: f64,
) -> Result<VerificationReport, VerifyError> {
    grid.validate(params.n_vertices)?;
    if samples.is_empty() {
        return Err(VerifyError::NoTrials);
    }
    let profile = cumulant_profile(params)?;
    let law = DeterministicLaw::from_profile(&profile, 0.0)?;
    let n = params.n_vertices;
    let mut points = Vec::new();
    for p in grid.points() {
        let z = p.z();
        let mt = law.mtilde(z)?;
        let bound = strong_bound(profile.q, n, p.eta);
        let residuals: Vec<f64> = samples
            .iter()
            .map(|s| Ok((stieltjes_of(complete(s)?, z) - mt).norm()))
            .collect::<Result<_, VerifyError>>()?;
        points.push(ratio_record(p, residuals, bound, margin));
    }
    Ok(VerificationReport::assemble(
        "strong",
        params,
        margin,
        samples.len(),
        profile.q,
        points,
    ))
}

fn complete(s: &SpectralSample) -> Result<&[f64], VerifyError> {
    if s.is_complete() {
        Ok(s.eigenvalues())
    } else {
        Err(SpectraError::Partial {
            available: s.eigenvalues().len(),
            order: s.order(),
        }
        .into())
    }
}

fn ratio_record(p: ComplexPoint, residuals: Vec<f64>, bound: f64, margin: f64) -> PointRecord {
    let ratios: Vec<f64> = residuals.iter().map(|r| r / bound).collect();
    let ratio = median(&ratios);
    PointRecord {
        z: [p.energy, p.eta],
        residual: median(&residuals),
        bound,
        ratio,
        psi: None,
        lambda_d: None,
        lambda_o: None,
        msc_residual: None,
        msc_bound: None,
        prediction: None,
        failing_trials: ratios
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > margin)
            .map(|(i, _)| i)
            .collect(),
        trial_ratios: ratios,
        pass: ratio <= margin,
    }
}

/// Resolvent-entry bounds at the points of `z_list`: `Λ_o ≤ margin·ψ` and
/// `max_i |G_ii − m| ≤ margin·ψ` must hold in at least 90% of trials. The
/// default margin is `N^{0.2}`.
pub fn weak_law_scan(
    params: &SbmParams,
    z_list: &[ComplexPoint],
    trials: usize,
    margin: Option<f64>,
) -> Result<VerificationReport, VerifyError> {
    let n = params.n_vertices;
    params.validate()?;
    if n > RESOLVENT_SIZE_GUARD {
        return Err(VerifyError::SizeGuard(n));
    }
    if trials == 0 {
        return Err(VerifyError::NoTrials);
    }
    if z_list.is_empty() {
        return Err(VerifyError::Domain("no spectral parameters given".into()));
    }
    for &p in z_list {
        check_point(p, DomainCheck::Local { ell: DEFAULT_ELL }, n)?;
    }
    let margin = margin.unwrap_or_else(|| (n as f64).powf(0.2));
    let profile = cumulant_profile(params)?;
    let q = profile.q;

    // stats[trial][point]
    let stats = (0..trials)
        .into_par_iter()
        .map(|t| {
            let h = SbmGraph::sample(params, trial_seed(params.seed, t))?.centered();
            z_list
                .iter()
                .map(|p| Ok(resolvent_entry_stats(&h, p.z(), false)?))
                .collect::<Result<Vec<_>, VerifyError>>()
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;

    let mut points = Vec::new();
    for (k, &p) in z_list.iter().enumerate() {
        let psi_z = psi(q, n, p.eta);
        let msc_bound = 1.0 / q.sqrt() + (n as f64 * p.eta).powf(-1.0 / 3.0);
        let per_trial: Vec<_> = stats.iter().map(|s| s[k]).collect();
        let ratios: Vec<f64> = per_trial
            .iter()
            .map(|s| s.lambda_o.max(s.diag_spread) / psi_z)
            .collect();
        let failing: Vec<usize> = ratios
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > margin)
            .map(|(i, _)| i)
            .collect();
        let passed = trials - failing.len();
        let lambda_o: Vec<f64> = per_trial.iter().map(|s| s.lambda_o).collect();
        let lambda_d: Vec<f64> = per_trial.iter().map(|s| s.lambda_d).collect();
        let msc_res: Vec<f64> = per_trial.iter().map(|s| (s.m() - msc(p.z())).norm()).collect();
        let diag: Vec<f64> = per_trial.iter().map(|s| s.diag_spread).collect();
        points.push(PointRecord {
            z: [p.energy, p.eta],
            residual: median(&lambda_o).max(median(&diag)),
            bound: psi_z,
            ratio: median(&ratios),
            psi: Some(psi_z),
            lambda_d: Some(median(&lambda_d)),
            lambda_o: Some(median(&lambda_o)),
            msc_residual: Some(median(&msc_res)),
            msc_bound: Some(msc_bound),
            prediction: None,
            trial_ratios: ratios,
            failing_trials: failing,
            pass: passed as f64 >= WEAK_PASS_FRACTION * trials as f64,
        });
    }
    Ok(VerificationReport::assemble("weak", params, margin, trials, q, points))
}

/// Empirical eigenvalue counts against `∫ρ̃` over each interval, bound
/// `(E₂ − E₁)/q² + 1/N`.
pub fn ids_compare(
    params: &SbmParams,
    intervals: &[(f64, f64)],
    trials: usize,
    margin: f64,
) -> Result<VerificationReport, VerifyError> {
    check_intervals(intervals)?;
    let samples = ensemble_spectra(params, trials, false)?;
    ids_report(params, intervals, &samples, margin)
}

fn check_intervals(intervals: &[(f64, f64)]) -> Result<(), VerifyError> {
    if intervals.is_empty() {
        return Err(VerifyError::Domain("no intervals given".into()));
    }
    for &(a, b) in intervals {
        if !(a < b && a > -3.0 && b < 3.0) {
            return Err(VerifyError::Domain(format!("-3 < E1 < E2 < 3 (got ({a}, {b}))")));
        }
    }
    Ok(())
}

pub fn ids_report(
    params: &SbmParams,
    intervals: &[(f64, f64)],
    samples: &[SpectralSample],
    margin: f64,
) -> Result<VerificationReport, VerifyError> {
    check_intervals(intervals)?;
    if samples.is_empty() {
        return Err(VerifyError::NoTrials);
    }
    let profile = cumulant_profile(params)?;
    let law = DeterministicLaw::from_profile(&profile, 0.0)?;
    let n = params.n_vertices;
    let mut points = Vec::new();
    for &(e1, e2) in intervals {
        let predicted = law.integrated_density(e1, e2)?;
        let bound = (e2 - e1) / (profile.q * profile.q) + 1.0 / n as f64;
        let residuals: Vec<f64> = samples
            .iter()
            .map(|s| Ok((esd_count(s, e1, e2)? - predicted).abs()))
            .collect::<Result<_, VerifyError>>()?;
        let mut rec = ratio_record(ComplexPoint { energy: e1, eta: e2 }, residuals, bound, margin);
        rec.prediction = Some(predicted);
        points.push(rec);
    }
    Ok(VerificationReport::assemble("ids", params, margin, samples.len(), profile.q, points))
}

/// `|‖H‖ − L|` against `q⁻⁴ + N^{−2/3}`, using the extremal-eigenvalue fast
/// path.
pub fn matrix_norm_check(params: &SbmParams, trials: usize, margin: f64) -> Result<VerificationReport, VerifyError> {
    let profile = cumulant_profile(params)?;
    let law = DeterministicLaw::from_profile(&profile, 0.0)?;
    let ensemble = edge_ensemble(params, trials, &law)?;
    norm_report(&ensemble, profile.q, margin)
}

/// Norm report from a precomputed edge ensemble. Passes when the median
/// `|‖H‖ − L|` is within `margin·(q⁻⁴ + N^{−2/3})`, and, where the shift
/// matters (`q⁻² ≥ 5 N^{−2/3}`), is also below the median `|‖H‖ − 2|`.
pub fn norm_report(ensemble: &EdgeEnsemble, q: f64, margin: f64) -> Result<VerificationReport, VerifyError> {
    let n = ensemble.params.n_vertices;
    let nf = n as f64;
    let l = ensemble.edge;
    let norms = ensemble.norms();
    if norms.is_empty() {
        return Err(VerifyError::NoTrials);
    }
    let bound = q.powi(-4) + nf.powf(-2.0 / 3.0);
    let err_l: Vec<f64> = norms.iter().map(|x| (x - l).abs()).collect();
    let err_2: Vec<f64> = norms.iter().map(|x| (x - 2.0).abs()).collect();
    let (med_l, med_2) = (median(&err_l), median(&err_2));
    let shift_matters = q.powi(-2) >= 5.0 * nf.powf(-2.0 / 3.0);
    let mut rec = ratio_record(ComplexPoint { energy: l, eta: 0.0 }, err_l, bound, margin);
    rec.z = [l, 2.0];
    rec.prediction = Some(l);
    if shift_matters && med_l >= med_2 {
        rec.pass = false;
    }
    let mut report = VerificationReport::assemble("norm", &ensemble.params, margin, norms.len(), q, vec![rec]);
    report.notes.push(format!(
        "median |norm - L| = {med_l:.6e}, median |norm - 2| = {med_2:.6e}, shift significant: {shift_matters}"
    ));
    Ok(report)
}
