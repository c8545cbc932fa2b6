//! Largest-eigenvalue statistics against the GOE Tracy–Widom law.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detlaw::DeterministicLaw;
use crate::model::{ModelError, SbmGraph, SbmParams};
use crate::rng::trial_seed;
use crate::spectra::{extremal_dense, lanczos, LanczosOptions, SpectraError};

/// Mean of the GOE Tracy–Widom distribution.
pub const TW1_MEAN: f64 = -1.2065;
/// Variance of the GOE Tracy–Widom distribution.
pub const TW1_VARIANCE: f64 = 1.6078;

const TABLE_CSV: &str = include_str!("../data/tw1_cdf.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdgeError {
    #[error("no samples")]
    EmptyInput,
    #[error("malformed Tracy–Widom table: {0}")]
    BadTable(String),
    #[error("need at least one trial")]
    NoTrials,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Tabulated F₁ with monotone cubic (Fritsch–Carlson) interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TwTable {
    grid: Vec<f64>,
    cdf: Vec<f64>,
    slopes: Vec<f64>,
}

impl TwTable {
    /// The table shipped with the library (s ∈ [−6, 4], step 0.05).
    pub fn embedded() -> &'static TwTable {
        static TABLE: OnceLock<TwTable> = OnceLock::new();
        TABLE.get_or_init(|| TwTable::from_csv(TABLE_CSV).expect("embedded table is well formed"))
    }

    /// Parses `s,F1` rows (a header line is skipped).
    pub fn from_csv(text: &str) -> Result<Self, EdgeError> {
        let mut grid = Vec::new();
        let mut cdf = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('s') {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |p: Option<&str>| -> Result<f64, EdgeError> {
                p.and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| EdgeError::BadTable(format!("line {}", lineno + 1)))
            };
            grid.push(parse(parts.next())?);
            cdf.push(parse(parts.next())?);
        }
        Self::new(grid, cdf)
    }

    pub fn new(grid: Vec<f64>, cdf: Vec<f64>) -> Result<Self, EdgeError> {
        if grid.len() < 2 || grid.len() != cdf.len() {
            return Err(EdgeError::BadTable("need at least two (s, F) pairs".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EdgeError::BadTable("grid not increasing".into()));
        }
        if cdf.windows(2).any(|w| w[1] < w[0]) || cdf.iter().any(|&f| !(0.0..=1.0).contains(&f)) {
            return Err(EdgeError::BadTable("values not a nondecreasing CDF".into()));
        }
        let slopes = fritsch_carlson(&grid, &cdf);
        Ok(Self { grid, cdf, slopes })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    /// F₁(s): 0 below the grid, 1 above it.
    pub fn cdf(&self, s: f64) -> f64 {
        let n = self.grid.len();
        if s < self.grid[0] {
            return 0.0;
        }
        if s > self.grid[n - 1] {
            return 1.0;
        }
        let k = self.grid.partition_point(|&g| g <= s).clamp(1, n - 1) - 1;
        let h = self.grid[k + 1] - self.grid[k];
        let t = (s - self.grid[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.cdf[k] + h10 * h * self.slopes[k] + h01 * self.cdf[k + 1] + h11 * h * self.slopes[k + 1];
        v.clamp(0.0, 1.0)
    }

    /// Smallest `s` in the grid range with `F₁(s) ≥ p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.grid.len();
        let (mut lo, mut hi) = (self.grid[0], self.grid[n - 1]);
        if p <= self.cdf(lo) {
            return lo;
        }
        if p >= self.cdf(hi) {
            return hi;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Mean and variance of the tabulated law (tails beyond the grid ignored).
    pub fn moments(&self) -> (f64, f64) {
        let steps = 20_000;
        let (a, b) = (self.grid[0], self.grid[self.grid.len() - 1]);
        let h = (b - a) / steps as f64;
        // E X = b − ∫ F, E X² = b² − 2 ∫ s F(s) ds (with F(a) ≈ 0)
        let mut int_f = 0.0;
        let mut int_sf = 0.0;
        for i in 0..=steps {
            let s = a + i as f64 * h;
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            let f = self.cdf(s);
            int_f += w * f * h;
            int_sf += w * s * f * h;
        }
        let a_term = a * self.cdf(a);
        let mean = b - int_f - a_term;
        let second = b * b - 2.0 * int_sf - a * a_term;
        (mean, second - mean * mean)
    }
}

fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[k - 1] + delta[k])
        };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    m
}

/// F₁(s) from `table`.
pub fn tw1_cdf(s: f64, table: &TwTable) -> f64 {
    table.cdf(s)
}

/// Kolmogorov–Smirnov distance `sup_s |F_emp(s) − F₁(s)|`.
pub fn ks_distance(samples: &[f64], table: &TwTable) -> Result<f64, EdgeError> {
    if samples.is_empty() {
        return Err(EdgeError::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &s) in sorted.iter().enumerate() {
        let f = table.cdf(s);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Equal-width histogram on `[lo, hi)`; returns `(bin_start, bin_end, count)`.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, usize)> {
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        if s >= lo && s < hi {
            let b = (((s - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| (lo + b as f64 * width, lo + (b + 1) as f64 * width, c))
        .collect()
}

/// Sparsity regime of the edge statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRegime {
    /// Tracy–Widom fluctuations around L are expected.
    TracyWidom,
    /// p below N^{−2/3}: transition towards Gaussian fluctuations.
    Crossover,
    /// p below log N / N: isolated vertices, neither law applies.
    Disconnected,
}

/// Classifies by the larger edge probability.
pub fn edge_regime(params: &SbmParams) -> EdgeRegime {
    let n = params.n_vertices as f64;
    let p = params.p_intra.max(params.p_inter);
    if p < n.ln() / n {
        EdgeRegime::Disconnected
    } else if p < n.powf(-2.0 / 3.0) {
        EdgeRegime::Crossover
    } else {
        EdgeRegime::TracyWidom
    }
}

/// How λ₁ is computed in an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremalSolver {
    /// Lanczos on the sparse matrix-free operator.
    #[default]
    Lanczos,
    /// Dense Householder reduction with Sturm bisection.
    Dense,
}

/// Per-trial largest eigenvalues with both edge rescalings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEnsemble {
    pub params: SbmParams,
    pub edge: f64,
    pub seeds: Vec<u64>,
    pub lambda1: Vec<f64>,
    pub lambda_min: Vec<f64>,
    /// N^{2/3}(λ₁ − L)
    pub rescaled_l: Vec<f64>,
    /// N^{2/3}(λ₁ − 2)
    pub rescaled_2: Vec<f64>,
}

impl EdgeEnsemble {
    /// ‖H‖ = max(λ₁, −λ_N) per trial.
    pub fn norms(&self) -> Vec<f64> {
        self.lambda1.iter().zip(&self.lambda_min).map(|(a, b)| a.max(-b)).collect()
    }

    pub fn summary(&self, table: &TwTable) -> Result<EdgeSummary, EdgeError> {
        let (mean_l, var_l) = mean_var(&self.rescaled_l)?;
        let (mean_2, var_2) = mean_var(&self.rescaled_2)?;
        Ok(EdgeSummary {
            trials: self.lambda1.len(),
            edge: self.edge,
            regime: edge_regime(&self.params),
            ks_l: ks_distance(&self.rescaled_l, table)?,
            ks_2: ks_distance(&self.rescaled_2, table)?,
            mean_l,
            mean_2,
            var_l,
            var_2,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSummary {
    pub trials: usize,
    pub edge: f64,
    pub regime: EdgeRegime,
    pub ks_l: f64,
    pub ks_2: f64,
    pub mean_l: f64,
    pub mean_2: f64,
    pub var_l: f64,
    pub var_2: f64,
}

pub fn mean_var(x: &[f64]) -> Result<(f64, f64), EdgeError> {
    if x.is_empty() {
        return Err(EdgeError::EmptyInput);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = if x.len() > 1 {
        x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok((mean, var))
}

/// Samples `trials` centred matrices and records their extreme eigenvalues.
pub fn edge_ensemble(params: &SbmParams, trials: usize, law: &DeterministicLaw) -> Result<EdgeEnsemble, EdgeError> {
    edge_ensemble_with(params, trials, law, ExtremalSolver::Lanczos)
}

pub fn edge_ensemble_with(
    params: &SbmParams,
    trials: usize,
    law: &DeterministicLaw,
    solver: ExtremalSolver,
) -> Result<EdgeEnsemble, EdgeError> {
    if trials == 0 {
        return Err(EdgeError::NoTrials);
    }
    params.validate()?;
    let seeds: Vec<u64> = (0..trials).map(|t| trial_seed(params.seed, t)).collect();
    let extremes = seeds
        .par_iter()
        .map(|&seed| extreme_eigenvalues(params, seed, solver))
        .collect::<Result<Vec<_>, EdgeError>>()?;
    let scale = (params.n_vertices as f64).powf(2.0 / 3.0);
    let edge = law.edge();
    let lambda1: Vec<f64> = extremes.iter().map(|e| e.0).collect();
    let lambda_min: Vec<f64> = extremes.iter().map(|e| e.1).collect();
    Ok(EdgeEnsemble {
        params: *params,
        edge,
        rescaled_l: lambda1.iter().map(|l| scale * (l - edge)).collect(),
        rescaled_2: lambda1.iter().map(|l| scale * (l - 2.0)).collect(),
        seeds,
        lambda1,
        lambda_min,
    })
}

/// `(λ₁, λ_N)` of one centred sample.
pub fn extreme_eigenvalues(params: &SbmParams, seed: u64, solver: ExtremalSolver) -> Result<(f64, f64), EdgeError> {
    let graph = SbmGraph::sample(params, seed)?;
    match solver {
        ExtremalSolver::Lanczos => {
            let opts = LanczosOptions {
                n_top: 1,
                n_bottom: 1,
                want_vectors: false,
                tol: 1e-10,
                max_steps: 2000,
                seed: seed.rotate_left(17) ^ 0x5eed,
            };
            let e = lanczos(&graph.operator(true), &opts)?;
            Ok((e.top[0], e.bottom[0]))
        }
        ExtremalSolver::Dense => Ok(extremal_dense(&graph.centered())),
    }
}
