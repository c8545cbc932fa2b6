//! Balanced sparse stochastic block models.
//!
//! Sampling of the rescaled adjacency matrix `A`, its centred version
//! `Ã = A − E A`, exact cumulants of the two-point entry laws, the derived
//! cumulant profile (σ², q, normalised cumulants, ζ, ξ⁽⁴⁾) and the Dyson
//! matrix flow towards a variance-matched Gaussian ensemble.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::seeded;
use crate::spectra::SymOperator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error(
        "below connectivity scale: N·p_d = {product:.3} < 1 (N = {n}, p_d = {p_inter}); \
         pass the override flag to sample anyway"
    )]
    BelowConnectivity { n: usize, p_inter: f64, product: f64 },
    #[error("cumulant order {0} is not supported (expected 2, 3 or 4)")]
    CumulantOrder(u32),
    #[error("invalid two-point law: p = {p}, sigma = {sigma}")]
    InvalidLaw { p: f64, sigma: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("flow time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
}

/// Parameters of a balanced SBM with `n_communities` blocks of equal size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmParams {
    pub n_vertices: usize,
    pub n_communities: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub seed: u64,
    /// Randomly permute community labels (seeded) instead of contiguous blocks.
    #[serde(default)]
    pub shuffle_labels: bool,
}

impl SbmParams {
    pub fn new(
        n_vertices: usize,
        n_communities: usize,
        p_intra: f64,
        p_inter: f64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let params = Self {
            n_vertices,
            n_communities,
            p_intra,
            p_inter,
            seed,
            shuffle_labels: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_vertices == 0 || self.n_communities == 0 {
            return Err(ModelError::InvalidParams(
                "N and K must be positive".to_string(),
            ));
        }
        if self.n_vertices % self.n_communities != 0 {
            return Err(ModelError::InvalidParams(format!(
                "K = {} does not divide N = {}",
                self.n_communities, self.n_vertices
            )));
        }
        for (name, p) in [("p_s", self.p_intra), ("p_d", self.p_inter)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(ModelError::InvalidParams(format!(
                    "{name} = {p} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }

    pub fn block_size(&self) -> usize {
        self.n_vertices / self.n_communities
    }

    /// σ² = (N/K) p_s(1−p_s) + (N(K−1)/K) p_d(1−p_d).
    pub fn sigma_sq(&self) -> f64 {
        let n = self.n_vertices as f64;
        let k = self.n_communities as f64;
        (n / k) * self.p_intra * (1.0 - self.p_intra)
            + (n * (k - 1.0) / k) * self.p_inter * (1.0 - self.p_inter)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq().sqrt()
    }

    /// Community label of every vertex. Contiguous blocks unless
    /// `shuffle_labels` is set, in which case the block layout is permuted
    /// with a generator derived from `seed`.
    pub fn labels(&self) -> Vec<usize> {
        let b = self.block_size();
        let mut labels: Vec<usize> = (0..self.n_vertices).map(|i| i / b).collect();
        if self.shuffle_labels {
            let mut rng = seeded(self.seed ^ 0x6c61_6265_6c73);
            labels.shuffle(&mut rng);
        }
        labels
    }

    /// N·p_d ≥ 1, the scale below which the graph is typically disconnected.
    pub fn check_connectivity(&self) -> Result<(), ModelError> {
        let product = self.n_vertices as f64 * self.p_inter;
        if product < 1.0 {
            return Err(ModelError::BelowConnectivity {
                n: self.n_vertices,
                p_inter: self.p_inter,
                product,
            });
        }
        Ok(())
    }

    fn prob(&self, same: bool) -> f64 {
        if same {
            self.p_intra
        } else {
            self.p_inter
        }
    }
}

/// Dense real symmetric matrix in full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from its upper triangle; `f(i, j)` is called for `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Wraps row-major data, checking that it is square and exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != n * n {
            return Err(ModelError::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(ModelError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets entries (i, j) and (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix, ModelError> {
        if self.n != other.n {
            return Err(ModelError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(SymMatrix { n: self.n, data })
    }
}

impl SymOperator for SymMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// One draw of the SBM graph: the edge set plus what is needed to form `A`
/// or `Ã` densely or as a matrix-free operator.
#[derive(Debug, Clone)]
pub struct SbmGraph {
    params: SbmParams,
    labels: Vec<usize>,
    sigma: f64,
    /// Upper-triangle edges `(i, j)` with `i < j`, in sampling order.
    edges: Vec<(u32, u32)>,
}

impl SbmGraph {
    /// Samples every pair `i < j` independently; the pair is an edge with
    /// probability `p_s` inside a community and `p_d` across.
    pub fn sample(params: &SbmParams, rng_seed: u64) -> Result<Self, ModelError> {
        params.validate()?;
        let n = params.n_vertices;
        let labels = params.labels();
        let mut rng = seeded(rng_seed);
        let expected = 0.5 * (n as f64).powi(2) * params.p_intra.max(params.p_inter);
        let mut edges = Vec::with_capacity(expected as usize + 16);
        for i in 0..n {
            for j in (i + 1)..n {
                let p = params.prob(labels[i] == labels[j]);
                if rng.random::<f64>() < p {
                    edges.push((i as u32, j as u32));
                }
            }
        }
        Ok(Self {
            params: *params,
            labels,
            sigma: params.sigma(),
            edges,
        })
    }

    pub fn params(&self) -> &SbmParams {
        &self.params
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Rescaled adjacency `A` with nonzero entries `1/σ`.
    pub fn adjacency(&self) -> SymMatrix {
        let mut a = SymMatrix::zeros(self.params.n_vertices);
        let w = 1.0 / self.sigma;
        for &(i, j) in &self.edges {
            a.set(i as usize, j as usize, w);
        }
        a
    }

    /// Centred matrix `Ã = A − E A`.
    pub fn centered(&self) -> SymMatrix {
        let n = self.params.n_vertices;
        let inv = 1.0 / self.sigma;
        let mut h = SymMatrix::from_upper(n, |i, j| {
            if i == j {
                0.0
            } else {
                -self.params.prob(self.labels[i] == self.labels[j]) * inv
            }
        });
        for &(i, j) in &self.edges {
            let (i, j) = (i as usize, j as usize);
            let v = h.get(i, j) + inv;
            h.set(i, j, v);
        }
        h
    }

    /// Matrix-free view of `A` (or `Ã` when `centered`), costing O(N + edges)
    /// per product.
    pub fn operator(&self, centered: bool) -> SbmOperator<'_> {
        let n = self.params.n_vertices;
        let mut degree = vec![0usize; n + 1];
        for &(i, j) in &self.edges {
            degree[i as usize + 1] += 1;
            degree[j as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut neighbours = vec![0u32; 2 * self.edges.len()];
        for &(i, j) in &self.edges {
            neighbours[fill[i as usize]] = j;
            fill[i as usize] += 1;
            neighbours[fill[j as usize]] = i;
            fill[j as usize] += 1;
        }
        SbmOperator {
            graph: self,
            offsets,
            neighbours,
            centered,
        }
    }
}

/// Sparse adjacency plus the rank-K block mean, applied without forming the
/// dense matrix.
pub struct SbmOperator<'a> {
    graph: &'a SbmGraph,
    offsets: Vec<usize>,
    neighbours: Vec<u32>,
    centered: bool,
}

impl SymOperator for SbmOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.params.n_vertices
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let inv = 1.0 / self.graph.sigma;
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self.neighbours[self.offsets[i]..self.offsets[i + 1]]
                .iter()
                .map(|&j| x[j as usize])
                .sum();
            *yi = s * inv;
        }
        if self.centered {
            let p = &self.graph.params;
            let labels = &self.graph.labels;
            let mut block_sums = vec![0.0; p.n_communities];
            for (xi, &l) in x.iter().zip(labels) {
                block_sums[l] += xi;
            }
            let total: f64 = block_sums.iter().sum();
            for ((yi, xi), &l) in y.iter_mut().zip(x).zip(labels) {
                let mean = p.p_intra * (block_sums[l] - xi) + p.p_inter * (total - block_sums[l]);
                *yi -= mean * inv;
            }
        }
    }
}

/// Options controlling the sampler's guards.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Sample even when N·p_d < 1.
    pub allow_disconnected: bool,
}

/// Samples the rescaled adjacency matrix `A`.
pub fn sample_adjacency(
    params: &SbmParams,
    rng_seed: u64,
    options: SampleOptions,
) -> Result<SymMatrix, ModelError> {
    if !options.allow_disconnected {
        params.check_connectivity()?;
    }
    Ok(SbmGraph::sample(params, rng_seed)?.adjacency())
}

/// Subtracts the block mean `p_x/σ` from every off-diagonal entry.
pub fn center_rescale(adjacency: &SymMatrix, params: &SbmParams) -> Result<SymMatrix, ModelError> {
    params.validate()?;
    if adjacency.order() != params.n_vertices {
        return Err(ModelError::DimensionMismatch {
            expected: params.n_vertices,
            found: adjacency.order(),
        });
    }
    let labels = params.labels();
    let inv = 1.0 / params.sigma();
    Ok(SymMatrix::from_upper(params.n_vertices, |i, j| {
        if i == j {
            0.0
        } else {
            adjacency.get(i, j) - params.prob(labels[i] == labels[j]) * inv
        }
    }))
}

/// `E A`: `p_x/σ` off the diagonal, zero on it.
pub fn expected_adjacency(params: &SbmParams) -> SymMatrix {
    let labels = params.labels();
    let inv = 1.0 / params.sigma();
    SymMatrix::from_upper(params.n_vertices, |i, j| {
        if i == j {
            0.0
        } else {
            params.prob(labels[i] == labels[j]) * inv
        }
    })
}

/// k-th cumulant of the law taking `(1−p)/σ` with probability `p` and `−p/σ`
/// otherwise, for k ∈ {2, 3, 4}.
pub fn bernoulli_centered_cumulant(p: f64, sigma: f64, k: u32) -> Result<f64, ModelError> {
    if !(p > 0.0 && p < 1.0) || !(sigma > 0.0) || !sigma.is_finite() {
        return Err(ModelError::InvalidLaw { p, sigma });
    }
    let v = p * (1.0 - p);
    match k {
        2 => Ok(v / sigma.powi(2)),
        3 => Ok(v * (1.0 - 2.0 * p) / sigma.powi(3)),
        4 => Ok(v * (1.0 - 6.0 * p + 6.0 * p * p) / sigma.powi(4)),
        other => Err(ModelError::CumulantOrder(other)),
    }
}

/// Variance normaliser, sparsity and normalised cumulants of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantProfile {
    pub n_vertices: usize,
    pub n_communities: usize,
    pub sigma_sq: f64,
    pub q: f64,
    pub s2_s: f64,
    pub s2_d: f64,
    pub s3_s: f64,
    pub s3_d: f64,
    pub s4_s: f64,
    pub s4_d: f64,
    pub zeta: f64,
    pub xi4: f64,
}

impl CumulantProfile {
    /// Quartic coefficient ξ⁽⁴⁾/q² of the refined law at t = 0.
    pub fn c4(&self) -> f64 {
        self.xi4 / (self.q * self.q)
    }

    /// Entry variance κ⁽²⁾ inside (`true`) or across communities.
    pub fn entry_variance(&self, same_block: bool) -> f64 {
        let s2 = if same_block { self.s2_s } else { self.s2_d };
        s2 / self.n_vertices as f64
    }

    /// Σ_j σ_ij² for any row (1 for a correctly normalised model).
    pub fn row_variance_sum(&self) -> f64 {
        let n = self.n_vertices as f64;
        let k = self.n_communities as f64;
        (n / k) * self.entry_variance(true) + (n * (k - 1.0) / k) * self.entry_variance(false)
    }
}

/// Computes the cumulant profile. The sparsity parameter is
/// `q = sqrt(κ⁽²⁾_eff / |κ⁽⁴⁾_eff|)` with community-averaged cumulants
/// `κ_eff = (κ_s + (K−1) κ_d)/K`, capped at `√N` where the fourth cumulant
/// vanishes.
pub fn cumulant_profile(params: &SbmParams) -> Result<CumulantProfile, ModelError> {
    params.validate()?;
    let n = params.n_vertices as f64;
    let k = params.n_communities as f64;
    let sigma = params.sigma();
    let kappa = |p: f64, order: u32| bernoulli_centered_cumulant(p, sigma, order);
    let (k2s, k2d) = (kappa(params.p_intra, 2)?, kappa(params.p_inter, 2)?);
    let (k3s, k3d) = (kappa(params.p_intra, 3)?, kappa(params.p_inter, 3)?);
    let (k4s, k4d) = (kappa(params.p_intra, 4)?, kappa(params.p_inter, 4)?);
    let k2_eff = (k2s + (k - 1.0) * k2d) / k;
    let k4_eff = (k4s + (k - 1.0) * k4d) / k;
    let q_cap = n.sqrt();
    let q = if k4_eff.abs() > 0.0 {
        (k2_eff / k4_eff.abs()).sqrt().min(q_cap)
    } else {
        q_cap
    };
    let s = |kappa: f64, order: i32| n * q.powi(order - 2) * kappa;
    let (s2_s, s2_d) = (s(k2s, 2), s(k2d, 2));
    let (s4_s, s4_d) = (s(k4s, 4), s(k4d, 4));
    Ok(CumulantProfile {
        n_vertices: params.n_vertices,
        n_communities: params.n_communities,
        sigma_sq: sigma * sigma,
        q,
        s2_s,
        s2_d,
        s3_s: s(k3s, 3),
        s3_d: s(k3d, 3),
        s4_s,
        s4_d,
        zeta: (s2_s - s2_d) / k,
        xi4: (s4_s + (k - 1.0) * s4_d) / k,
    })
}

/// A point on the Dyson matrix flow together with its time-dependent
/// parameters.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub matrix: SymMatrix,
    pub t: f64,
    /// q_t = q·e^{t/2}
    pub q_t: f64,
    /// ζ_t; second cumulants are preserved along the flow, so ζ_t = ζ.
    pub zeta_t: f64,
    /// Quartic coefficient e^{−2t} ξ⁽⁴⁾ / q².
    pub c4_t: f64,
}

/// `H_t = e^{−t/2} H₀ + sqrt(1 − e^{−t}) W`, where `W` is symmetric Gaussian
/// with zero diagonal and the same per-block variances as `H₀`.
pub fn dyson_flow_sample(
    h0: &SymMatrix,
    t: f64,
    gauss_seed: u64,
    profile: &CumulantProfile,
    params: &SbmParams,
) -> Result<FlowSample, ModelError> {
    if !(t >= 0.0) {
        return Err(ModelError::NegativeTime(t));
    }
    let n = h0.order();
    if n != profile.n_vertices || n != params.n_vertices {
        return Err(ModelError::DimensionMismatch {
            expected: profile.n_vertices,
            found: n,
        });
    }
    let q_t = profile.q * (0.5 * t).exp();
    let c4_t = (-2.0 * t).exp() * profile.c4();
    if t == 0.0 {
        return Ok(FlowSample {
            matrix: h0.clone(),
            t,
            q_t,
            zeta_t: profile.zeta,
            c4_t,
        });
    }
    let labels = params.labels();
    let decay = (-0.5 * t).exp();
    let mix = (1.0 - (-t).exp()).sqrt();
    let sd_same = profile.entry_variance(true).sqrt();
    let sd_diff = profile.entry_variance(false).sqrt();
    let mut rng = seeded(gauss_seed);
    let matrix = SymMatrix::from_upper(n, |i, j| {
        if i == j {
            return 0.0;
        }
        let g: f64 = rng.sample(StandardNormal);
        let sd = if labels[i] == labels[j] { sd_same } else { sd_diff };
        decay * h0.get(i, j) + mix * sd * g
    });
    Ok(FlowSample {
        matrix,
        t,
        q_t,
        zeta_t: profile.zeta,
        c4_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2a() -> SbmParams {
        SbmParams::new(3000, 3, 0.03, 0.01, 1).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SbmParams::new(10, 3, 0.1, 0.1, 0).is_err());
        assert!(SbmParams::new(10, 2, 0.0, 0.1, 0).is_err());
        assert!(SbmParams::new(10, 2, 0.1, 1.0, 0).is_err());
        assert!(SbmParams::new(0, 1, 0.1, 0.1, 0).is_err());
    }

    #[test]
    fn two_vertex_sigma_and_entry() {
        // σ² = (N/K)·p(1−p) = 2·0.5·0.5
        let p = SbmParams::new(2, 1, 0.5, 0.5, 0).unwrap();
        let expected = 2.0 * 0.5 * 0.5;
        assert_eq!(p.sigma_sq(), expected);
        let a = sample_adjacency(&p, 3, SampleOptions::default()).unwrap();
        let v = a.get(0, 1);
        assert!(v == 0.0 || (v - 1.0 / expected.sqrt()).abs() < 1e-15);
        assert_eq!(a.get(0, 0), 0.0);
    }

    #[test]
    fn connectivity_guard() {
        let p = SbmParams::new(100, 2, 0.05, 0.005, 0).unwrap();
        let err = sample_adjacency(&p, 0, SampleOptions::default()).unwrap_err();
        assert!(matches!(err, ModelError::BelowConnectivity { .. }));
        let ok = sample_adjacency(
            &p,
            0,
            SampleOptions {
                allow_disconnected: true,
            },
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn centred_entries_take_two_values() {
        let p = SbmParams::new(60, 3, 0.3, 0.1, 5).unwrap();
        let a = sample_adjacency(&p, 11, SampleOptions::default()).unwrap();
        let h = center_rescale(&a, &p).unwrap();
        let s = p.sigma();
        let labels = p.labels();
        for i in 0..60 {
            assert_eq!(h.get(i, i), 0.0);
            for j in 0..60 {
                if i == j {
                    continue;
                }
                let px = if labels[i] == labels[j] { 0.3 } else { 0.1 };
                let v = h.get(i, j);
                let hi = (1.0 - px) / s;
                let lo = -px / s;
                assert!((v - hi).abs() < 1e-14 || (v - lo).abs() < 1e-14);
                assert_eq!(a.get(i, j) == 0.0, (v - lo).abs() < 1e-14);
            }
        }
        let g = SbmGraph::sample(&p, 11).unwrap();
        assert_eq!(g.centered(), h);
    }

    #[test]
    fn center_rescale_dimension_mismatch() {
        let p = SbmParams::new(6, 2, 0.3, 0.1, 5).unwrap();
        let err = center_rescale(&SymMatrix::zeros(4), &p).unwrap_err();
        assert_eq!(err, ModelError::DimensionMismatch { expected: 6, found: 4 });
    }

    #[test]
    fn operator_matches_dense() {
        let p = SbmParams::new(90, 3, 0.2, 0.05, 2).unwrap();
        let g = SbmGraph::sample(&p, 4).unwrap();
        let x: Vec<f64> = (0..90).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        for centered in [false, true] {
            let dense = if centered { g.centered() } else { g.adjacency() };
            let mut y1 = vec![0.0; 90];
            let mut y2 = vec![0.0; 90];
            dense.apply(&x, &mut y1);
            g.operator(centered).apply(&x, &mut y2);
            for (a, b) in y1.iter().zip(&y2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cumulant_closed_forms() {
        assert_eq!(bernoulli_centered_cumulant(0.5, 1.0, 3).unwrap(), 0.0);
        assert_eq!(bernoulli_centered_cumulant(0.5, 1.0, 2).unwrap(), 0.25);
        assert_eq!(
            bernoulli_centered_cumulant(0.5, 1.0, 5),
            Err(ModelError::CumulantOrder(5))
        );
        assert!(bernoulli_centered_cumulant(1.2, 1.0, 2).is_err());
    }

    #[test]
    fn profile_row_sum_and_symmetry() {
        let prof = cumulant_profile(&fig2a()).unwrap();
        assert!((prof.row_variance_sum() - 1.0).abs() < 1e-14);
        assert!(prof.q > 0.0);
        // q defined through κ_eff makes ξ⁽⁴⁾ = N κ⁽²⁾_eff = 1.
        assert!((prof.xi4 - 1.0).abs() < 1e-12);

        let er = SbmParams::new(500, 5, 0.05, 0.05, 0).unwrap();
        let prof = cumulant_profile(&er).unwrap();
        assert_eq!(prof.zeta, 0.0);
        assert_eq!(prof.s2_s, prof.s2_d);
        assert_eq!(prof.s3_s, prof.s3_d);
        assert_eq!(prof.s4_s, prof.s4_d);
    }

    #[test]
    fn profile_erdos_renyi_algebra() {
        let n = 1000usize;
        let p = (n as f64).powf(-1.0 + 2.0 * 0.3);
        let params = SbmParams::new(n, 1, p, p, 0).unwrap();
        let prof = cumulant_profile(&params).unwrap();
        let sigma = params.sigma();
        let k4 = p * (1.0 - p) * (1.0 - 6.0 * p + 6.0 * p * p) / sigma.powi(4);
        assert!((n as f64 * prof.q * prof.q * k4 - prof.s4_s).abs() < 1e-12);
        assert!((prof.xi4 - prof.s4_s).abs() < 1e-15);
        let approx_q = (n as f64 * p * (1.0 - p) / (1.0 - 6.0 * p + 6.0 * p * p)).sqrt();
        assert!((prof.q - approx_q).abs() < 1e-9 * approx_q);
    }

    #[test]
    fn dyson_flow_identity_and_metadata() {
        let params = SbmParams::new(40, 2, 0.3, 0.1, 0).unwrap();
        let prof = cumulant_profile(&params).unwrap();
        let h0 = SbmGraph::sample(&params, 1).unwrap().centered();
        let f0 = dyson_flow_sample(&h0, 0.0, 9, &prof, &params).unwrap();
        assert_eq!(f0.matrix, h0);
        let t = 2.0 * 2f64.ln();
        let f = dyson_flow_sample(&h0, t, 9, &prof, &params).unwrap();
        assert!((f.q_t - 2.0 * prof.q).abs() < 1e-12 * prof.q);
        assert!(matches!(
            dyson_flow_sample(&h0, -1.0, 9, &prof, &params),
            Err(ModelError::NegativeTime(_))
        ));
        for i in 0..40 {
            assert_eq!(f.matrix.get(i, i), 0.0);
        }
    }

    #[test]
    fn shuffled_labels_stay_balanced() {
        let mut p = SbmParams::new(30, 3, 0.3, 0.1, 8).unwrap();
        p.shuffle_labels = true;
        let labels = p.labels();
        for c in 0..3 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 10);
        }
        assert_ne!(labels, SbmParams { shuffle_labels: false, ..p }.labels());
    }
}
