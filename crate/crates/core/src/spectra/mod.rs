//! Eigendecomposition, empirical Stieltjes transform, resolvent entries and
//! eigenvector statistics.

mod lanczos;
mod resolvent;
pub mod tridiag;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detlaw::msc;
use crate::model::{SbmParams, SymMatrix};

pub use lanczos::{lanczos, ExtremalEigen, LanczosOptions};
pub use resolvent::{resolvent, ComplexMatrix};

/// Largest order for which dense resolvents are formed without `force`.
pub const RESOLVENT_SIZE_GUARD: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),
    #[error("sample carries no eigenvectors")]
    MissingVectors,
    #[error("dense resolvent requested for N = {0} > {RESOLVENT_SIZE_GUARD}; use force to override")]
    SizeGuard(usize),
    #[error("matrix H − z is numerically singular")]
    Singular,
    #[error("spectral parameter must satisfy Im z > 0, got {0}")]
    NotUpperHalfPlane(f64),
    #[error("sample holds only the leading {available} of {order} eigenvalues")]
    Partial { available: usize, order: usize },
    #[error("{0}")]
    InvalidRequest(String),
}

/// A real symmetric linear operator.
pub trait SymOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Where a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleMeta {
    pub params: Option<SbmParams>,
    pub seed: Option<u64>,
    pub flow_time: f64,
    pub centered: bool,
}

/// Eigenvalues in descending order, optionally with orthonormal eigenvectors
/// (`eigenvector(i)` belongs to `eigenvalues[i]`). A partial sample holds
/// only the leading eigenpairs of an order-`order` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSample {
    order: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: Option<Vec<f64>>,
    pub meta: SampleMeta,
}

impl SpectralSample {
    /// Builds a sample, sorting eigenpairs into descending order (stable in
    /// the original index). `eigenvectors` holds one vector per row.
    pub fn new(order: usize, eigenvalues: Vec<f64>, eigenvectors: Option<Vec<f64>>, meta: SampleMeta) -> Self {
        let m = eigenvalues.len();
        assert!(m <= order, "more eigenvalues than the matrix order");
        if let Some(v) = &eigenvectors {
            assert_eq!(v.len(), m * order, "eigenvector storage has the wrong size");
        }
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
        let sorted: Vec<f64> = idx.iter().map(|&i| eigenvalues[i]).collect();
        let vectors = eigenvectors.map(|v| {
            let mut out = Vec::with_capacity(v.len());
            for &i in &idx {
                out.extend_from_slice(&v[i * order..(i + 1) * order]);
            }
            out
        });
        Self {
            order,
            eigenvalues: sorted,
            eigenvectors: vectors,
            meta,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_complete(&self) -> bool {
        self.eigenvalues.len() == self.order
    }

    pub fn has_vectors(&self) -> bool {
        self.eigenvectors.is_some()
    }

    pub fn eigenvector(&self, i: usize) -> Option<&[f64]> {
        self.eigenvectors
            .as_ref()
            .map(|v| &v[i * self.order..(i + 1) * self.order])
    }

    /// All eigenvectors, one per row of length `order`.
    pub fn eigenvectors(&self) -> Option<&[f64]> {
        self.eigenvectors.as_deref()
    }

    pub fn with_meta(mut self, meta: SampleMeta) -> Self {
        self.meta = meta;
        self
    }

    fn require_complete(&self) -> Result<(), SpectraError> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(SpectraError::Partial {
                available: self.eigenvalues.len(),
                order: self.order,
            })
        }
    }
}

/// Full eigendecomposition by Householder tridiagonalization and implicit QL.
pub fn eigen_sym(h: &SymMatrix, want_vectors: bool) -> Result<SpectralSample, SpectraError> {
    let n = h.order();
    let (mut t, q) = tridiag::householder(h.as_slice(), n, want_vectors);
    let mut zt = q.map(|q| transpose(&q, n));
    let result = match zt.as_mut() {
        Some(z) => tridiag::tql(&mut t, Some((z.as_mut_slice(), n))),
        None => tridiag::tql(&mut t, None),
    };
    result.map_err(|e| SpectraError::NonConvergence(format!("QL iteration exceeded {} sweeps", e.iterations)))?;
    Ok(SpectralSample::new(n, t.diag, zt, SampleMeta::default()))
}

/// Largest and smallest eigenvalues only, from the Sturm count on the
/// tridiagonal form.
pub fn extremal_dense(h: &SymMatrix) -> (f64, f64) {
    let n = h.order();
    let (t, _) = tridiag::householder(h.as_slice(), n, false);
    (t.kth_largest(0, 0.0), t.kth_largest(n - 1, 0.0))
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    out[j * n + i] = a[i * n + j];
                }
            }
        }
    }
    out
}

/// `(1/N) Σ_k 1/(λ_k − z)`.
pub fn empirical_stieltjes(sample: &SpectralSample, z: Complex64) -> Result<Complex64, SpectraError> {
    if !(z.im > 0.0) {
        return Err(SpectraError::NotUpperHalfPlane(z.im));
    }
    sample.require_complete()?;
    Ok(stieltjes_of(sample.eigenvalues(), z))
}

pub(crate) fn stieltjes_of(eigenvalues: &[f64], z: Complex64) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    for &l in eigenvalues {
        let dr = l - z.re;
        let inv = 1.0 / (dr * dr + z.im * z.im);
        re += dr * inv;
        im += z.im * inv;
    }
    let n = eigenvalues.len() as f64;
    Complex64::new(re / n, im / n)
}

/// Summary statistics of the resolvent entries at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventStats {
    /// `max_k |G_kk − m_sc(z)|`
    pub lambda_d: f64,
    /// `max_{k≠l} |G_kl|`
    pub lambda_o: f64,
    /// `max_i |Σ_j |G_ij|² − Im G_ii / η|`
    pub wald_residual: f64,
    /// `m = (1/N) tr G`
    pub m_re: f64,
    pub m_im: f64,
    /// `max_k |G_kk − m|`
    pub diag_spread: f64,
}

impl ResolventStats {
    pub fn m(&self) -> Complex64 {
        Complex64::new(self.m_re, self.m_im)
    }
}

pub fn resolvent_entry_stats(h: &SymMatrix, z: Complex64, force: bool) -> Result<ResolventStats, SpectraError> {
    if !(z.im > 0.0) {
        return Err(SpectraError::NotUpperHalfPlane(z.im));
    }
    let n = h.order();
    if n > RESOLVENT_SIZE_GUARD && !force {
        return Err(SpectraError::SizeGuard(n));
    }
    let g = resolvent(h, z)?;
    let msc_z = msc(z);
    let mut trace = Complex64::new(0.0, 0.0);
    let mut lambda_d = 0.0f64;
    let mut lambda_o = 0.0f64;
    let mut wald = 0.0f64;
    for i in 0..n {
        let gii = g.get(i, i);
        trace += gii;
        lambda_d = lambda_d.max((gii - msc_z).norm());
        let re = &g.re[i * n..(i + 1) * n];
        let im = &g.im[i * n..(i + 1) * n];
        let mut row_sq = 0.0;
        let mut off_max = 0.0f64;
        for (j, (a, b)) in re.iter().zip(im).enumerate() {
            let sq = a * a + b * b;
            row_sq += sq;
            if j != i {
                off_max = off_max.max(sq);
            }
        }
        lambda_o = lambda_o.max(off_max.sqrt());
        wald = wald.max((row_sq - gii.im / z.im).abs());
    }
    let m = trace / n as f64;
    let diag_spread = (0..n).map(|i| (g.get(i, i) - m).norm()).fold(0.0, f64::max);
    Ok(ResolventStats {
        lambda_d,
        lambda_o,
        wald_residual: wald,
        m_re: m.re,
        m_im: m.im,
        diag_spread,
    })
}

/// `(1/N) |{i : e1 < λ_i < e2}|`.
pub fn esd_count(sample: &SpectralSample, e1: f64, e2: f64) -> Result<f64, SpectraError> {
    if !(e1 < e2) {
        return Err(SpectraError::InvalidRequest(format!("empty interval ({e1}, {e2})")));
    }
    sample.require_complete()?;
    let ev = sample.eigenvalues();
    // descending order: count of λ > e1 minus count of λ >= e2
    let above_e1 = ev.partition_point(|&l| l > e1);
    let at_least_e2 = ev.partition_point(|&l| l >= e2);
    Ok((above_e1 - at_least_e2) as f64 / sample.order() as f64)
}

/// `max_i ‖u_i‖_∞` over the stored eigenvectors.
pub fn delocalization_stat(sample: &SpectralSample) -> Result<f64, SpectraError> {
    let v = sample.eigenvectors().ok_or(SpectraError::MissingVectors)?;
    Ok(v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// `max |VᵀV − I|` over the stored eigenvectors.
pub fn orthonormality_residual(sample: &SpectralSample) -> Result<f64, SpectraError> {
    let v = sample.eigenvectors().ok_or(SpectraError::MissingVectors)?;
    let n = sample.order();
    let m = sample.eigenvalues().len();
    let mut worst = 0.0f64;
    for a in 0..m {
        let va = &v[a * n..(a + 1) * n];
        for b in a..m {
            let vb = &v[b * n..(b + 1) * n];
            let d = lanczos::dot(va, vb) - if a == b { 1.0 } else { 0.0 };
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}

/// `‖H − V Λ Vᵀ‖_F`.
pub fn reconstruction_residual(h: &SymMatrix, sample: &SpectralSample) -> Result<f64, SpectraError> {
    let v = sample.eigenvectors().ok_or(SpectraError::MissingVectors)?;
    sample.require_complete()?;
    let n = h.order();
    let lam = sample.eigenvalues();
    let mut total = 0.0;
    let mut row = vec![0.0; n];
    for i in 0..n {
        row.iter_mut().for_each(|x| *x = 0.0);
        for (k, &l) in lam.iter().enumerate() {
            let vk = &v[k * n..(k + 1) * n];
            let f = l * vk[i];
            for (r, x) in row.iter_mut().zip(vk) {
                *r += f * x;
            }
        }
        total += h.row(i).iter().zip(&row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total.sqrt())
}
