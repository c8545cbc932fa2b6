//! Outlier counting, spectral-gap checks and spectral clustering of the
//! non-centred adjacency matrix.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, SbmGraph, SbmParams};
use crate::rng::seeded;
use crate::spectra::{lanczos, LanczosOptions, SampleMeta, SpectraError, SpectralSample};

/// Default offset `c` of the bulk-edge threshold `2 + c`.
pub const DEFAULT_C: f64 = 0.1;
/// Required ratio between the outlier gap and the spacing inside the bulk.
pub const GAP_FACTOR: f64 = 10.0;
pub const KMEANS_RESTARTS: usize = 20;
pub const KMEANS_MAX_ITER: usize = 100;
pub const KMEANS_TOL: f64 = 1e-8;
const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("sample carries no eigenvectors")]
    MissingVectors,
    #[error("top-{k} eigenvalues are not separated from the next one (gap {gap:.3e})")]
    DegenerateEmbedding { k: usize, gap: f64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("{0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub k: usize,
    pub lambda_k: f64,
    pub lambda_k1: f64,
    pub lambda_k2: f64,
    pub bulk_edge_threshold: f64,
    /// λ_K − λ_{K+1}
    pub gap: f64,
    /// λ_{K+1} − λ_{K+2}
    pub intra_bulk_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self, DetectError> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(DetectError::InvalidRequest(format!("label {bad} outside 0..{k}")));
        }
        Ok(Self { labels, k })
    }

    /// Ground-truth partition of a model.
    pub fn truth(params: &SbmParams) -> Self {
        Self {
            labels: params.labels(),
            k: params.n_communities,
        }
    }
}

/// Number of eigenvalues above `threshold`. For a partial sample this is a
/// lower bound when every stored eigenvalue exceeds the threshold.
pub fn count_outliers(sample: &SpectralSample, threshold: f64) -> usize {
    sample.eigenvalues().partition_point(|&l| l > threshold)
}

pub fn gap_check(sample: &SpectralSample, k: usize, c: f64) -> Result<GapReport, DetectError> {
    let ev = sample.eigenvalues();
    if k == 0 || ev.len() < k + 2 {
        return Err(DetectError::InvalidRequest(format!(
            "gap check for k = {k} needs at least {} eigenvalues, sample has {}",
            k + 2,
            ev.len()
        )));
    }
    let (lk, lk1, lk2) = (ev[k - 1], ev[k], ev[k + 1]);
    let threshold = 2.0 + c;
    let gap = lk - lk1;
    let intra = lk1 - lk2;
    Ok(GapReport {
        k,
        lambda_k: lk,
        lambda_k1: lk1,
        lambda_k2: lk2,
        bulk_edge_threshold: threshold,
        gap,
        intra_bulk_gap: intra,
        pass: lk1 < threshold && threshold < lk && gap > GAP_FACTOR * intra,
    })
}

/// The `n_values` largest eigenvalues of the non-centred adjacency matrix,
/// with their eigenvectors if requested.
pub fn top_spectrum(graph: &SbmGraph, n_values: usize, with_vectors: bool, seed: u64) -> Result<SpectralSample, DetectError> {
    let op = graph.operator(false);
    let opts = LanczosOptions {
        n_top: n_values,
        n_bottom: 0,
        want_vectors: with_vectors,
        tol: 1e-9,
        max_steps: 3000,
        seed,
    };
    let e = lanczos(&op, &opts)?;
    let meta = SampleMeta {
        params: Some(*graph.params()),
        seed: Some(seed),
        flow_time: 0.0,
        centered: false,
    };
    Ok(SpectralSample::new(graph.params().n_vertices, e.top, e.top_vectors, meta))
}

/// Clusters the rows of the top-`k` eigenvector embedding with Lloyd
/// k-means (20 farthest-point-seeded restarts, best inertia wins).
pub fn spectral_partition(sample: &SpectralSample, k: usize, seed: u64) -> Result<Partition, DetectError> {
    let embedding = embedding(sample, k)?;
    let n = sample.order();
    let (labels, _) = kmeans(&embedding, n, k, k, KMEANS_RESTARTS, seed);
    Ok(Partition { labels, k })
}

/// Two-way split by the sign of the second eigenvector.
pub fn sign_partition(sample: &SpectralSample) -> Result<Partition, DetectError> {
    embedding(sample, 2)?;
    let v = sample.eigenvector(1).ok_or(DetectError::MissingVectors)?;
    Ok(Partition {
        labels: v.iter().map(|&x| usize::from(x < 0.0)).collect(),
        k: 2,
    })
}

/// Row-major `N × k` matrix of the top-`k` eigenvectors.
fn embedding(sample: &SpectralSample, k: usize) -> Result<Vec<f64>, DetectError> {
    if k < 2 {
        return Err(DetectError::InvalidRequest("need k >= 2 communities".into()));
    }
    let vecs = sample.eigenvectors().ok_or(DetectError::MissingVectors)?;
    let n = sample.order();
    let stored = vecs.len() / n;
    let ev = sample.eigenvalues();
    if stored < k || ev.len() < k + 1 {
        return Err(DetectError::InvalidRequest(format!(
            "need {k} eigenvectors and {} eigenvalues, sample has {stored} and {}",
            k + 1,
            ev.len()
        )));
    }
    let gap = ev[k - 1] - ev[k];
    if gap <= DEGENERACY_TOL {
        return Err(DetectError::DegenerateEmbedding { k, gap });
    }
    let mut x = vec![0.0; n * k];
    for c in 0..k {
        let v = &vecs[c * n..(c + 1) * n];
        for i in 0..n {
            x[i * k + c] = v[i];
        }
    }
    Ok(x)
}

/// Lloyd's algorithm on `n` points of dimension `d`, best of `restarts`
/// runs. Returns labels and inertia.
pub fn kmeans(x: &[f64], n: usize, d: usize, k: usize, restarts: usize, seed: u64) -> (Vec<usize>, f64) {
    assert!(k >= 1 && n >= k && x.len() == n * d);
    let runs: Vec<(Vec<usize>, f64)> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| lloyd(x, n, d, k, seed ^ r.wrapping_mul(0x9e37_79b9)))
        .collect();
    // first minimum: ties go to the lowest restart index
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.1 < runs[best].1 {
            best = i;
        }
    }
    runs.into_iter().nth(best).expect("at least one restart")
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lloyd(x: &[f64], n: usize, d: usize, k: usize, seed: u64) -> (Vec<usize>, f64) {
    let point = |i: usize| &x[i * d..(i + 1) * d];
    let mut rng = seeded(seed);
    let mut centers = Vec::with_capacity(k * d);
    centers.extend_from_slice(point(rng.random_range(0..n)));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(point(i), &centers[..d])).collect();
    for _ in 1..k {
        let far = (0..n).fold(0, |b, i| if nearest[i] > nearest[b] { i } else { b });
        centers.extend_from_slice(point(far));
        let c = &centers[centers.len() - d..];
        for i in 0..n {
            nearest[i] = nearest[i].min(sq_dist(point(i), c));
        }
    }
    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;
    for _ in 0..KMEANS_MAX_ITER {
        let mut total = 0.0;
        for i in 0..n {
            let (mut bl, mut bd) = (0, f64::INFINITY);
            for c in 0..k {
                let dist = sq_dist(point(i), &centers[c * d..(c + 1) * d]);
                if dist < bd {
                    bl = c;
                    bd = dist;
                }
            }
            labels[i] = bl;
            total += bd;
        }
        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, v) in sums[labels[i] * d..(labels[i] + 1) * d].iter_mut().zip(point(i)) {
                *s += v;
            }
        }
        let mut shift = 0.0f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for j in 0..d {
                let new = sums[c * d + j] / counts[c] as f64;
                shift = shift.max((new - centers[c * d + j]).abs());
                centers[c * d + j] = new;
            }
        }
        let improvement = inertia - total;
        inertia = total;
        if shift <= KMEANS_TOL || improvement.abs() <= KMEANS_TOL * total.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (labels, inertia)
}

/// Fraction of vertices labelled correctly under the best matching of
/// labels (Hungarian assignment on the confusion matrix).
pub fn detection_accuracy(p: &Partition, truth: &Partition) -> Result<f64, DetectError> {
    if p.labels.len() != truth.labels.len() || p.k != truth.k {
        return Err(DetectError::SizeMismatch(format!(
            "partitions of {} vertices into {} and {} vertices into {}",
            p.labels.len(),
            p.k,
            truth.labels.len(),
            truth.k
        )));
    }
    let k = p.k;
    if p.labels.is_empty() {
        return Ok(1.0);
    }
    let mut conf = vec![vec![0i64; k]; k];
    for (&a, &b) in p.labels.iter().zip(&truth.labels) {
        conf[a][b] += 1;
    }
    let cost: Vec<Vec<i64>> = conf.iter().map(|row| row.iter().map(|&c| -c).collect()).collect();
    let assignment = hungarian(&cost);
    let matched: i64 = assignment.iter().enumerate().map(|(r, &c)| conf[r][c]).sum();
    Ok(matched as f64 / p.labels.len() as f64)
}

/// Minimum-cost assignment for a square cost matrix; returns the column
/// assigned to each row.
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}

/// Outcome of one detection trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub seed: u64,
    pub k_hat: usize,
    pub gap_report: GapReport,
    pub accuracy: Option<f64>,
    pub top_eigenvalues: Vec<f64>,
}

/// Samples `A`, estimates K by counting outliers above `2 + c`, checks the
/// gap at the true K and, if `partition`, clusters and scores the result.
pub fn detect_once(params: &SbmParams, seed: u64, c: f64, partition: bool) -> Result<DetectionOutcome, DetectError> {
    let k = params.n_communities;
    let graph = SbmGraph::sample(params, seed)?;
    let sample = top_spectrum(&graph, k + 3, partition && k >= 2, seed.rotate_left(23) ^ 0xde7e)?;
    let gap_report = gap_check(&sample, k, c)?;
    let accuracy = if partition && k >= 2 {
        let p = spectral_partition(&sample, k, seed)?;
        Some(detection_accuracy(&p, &Partition::truth(params))?)
    } else {
        None
    };
    Ok(DetectionOutcome {
        seed,
        k_hat: count_outliers(&sample, 2.0 + c),
        gap_report,
        accuracy,
        top_eigenvalues: sample.eigenvalues().to_vec(),
    })
}

/// Gap report for each `K` in `ks` dividing `N`, other parameters fixed.
pub fn sweep_k(params: &SbmParams, ks: &[usize], c: f64) -> Result<Vec<GapReport>, DetectError> {
    ks.iter()
        .filter(|&&k| k >= 1 && params.n_vertices % k == 0)
        .map(|&k| {
            let p = SbmParams {
                n_communities: k,
                ..*params
            };
            Ok(detect_once(&p, p.seed, c, false)?.gap_report)
        })
        .collect()
}
