//! Lanczos iteration with full reorthogonalization for extremal eigenpairs
//! of a symmetric operator.

use rand::Rng;

use super::tridiag::{shifted_solve, tql, Tridiagonal};
use super::{SpectraError, SymOperator};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Number of largest eigenvalues wanted.
    pub n_top: usize,
    /// Number of smallest eigenvalues wanted.
    pub n_bottom: usize,
    /// Also return eigenvectors for the largest eigenvalues.
    pub want_vectors: bool,
    /// Absolute residual tolerance `‖A x − θ x‖`.
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            n_top: 1,
            n_bottom: 1,
            want_vectors: false,
            tol: 1e-10,
            max_steps: 1000,
            seed: 0x1a2c_2005,
        }
    }
}

/// Extremal eigenpairs: `top` descending, `bottom` ascending, and
/// `top_vectors` stored one eigenvector per row.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalEigen {
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top_vectors: Option<Vec<f64>>,
    pub steps: usize,
    pub max_residual: f64,
}

const CHECK_EVERY: usize = 8;

pub fn lanczos<A: SymOperator + ?Sized>(op: &A, opts: &LanczosOptions) -> Result<ExtremalEigen, SpectraError> {
    let n = op.dim();
    if n == 0 || opts.n_top + opts.n_bottom == 0 || opts.n_top.max(opts.n_bottom) > n {
        return Err(SpectraError::InvalidRequest(format!(
            "cannot extract {} + {} eigenvalues from an operator of order {n}",
            opts.n_top, opts.n_bottom
        )));
    }
    let max_steps = opts.max_steps.min(n).max(opts.n_top.max(opts.n_bottom));
    let mut rng = seeded(opts.seed);
    let mut basis: Vec<f64> = Vec::with_capacity(n * max_steps.min(256));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let mut q = random_unit(&mut rng, n, &basis);
    let mut w = vec![0.0; n];
    let mut coeffs = Vec::new();

    loop {
        let j = alpha.len();
        basis.extend_from_slice(&q);
        op.apply(&q, &mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if j > 0 {
            let prev = &basis[(j - 1) * n..j * n];
            axpy(-beta[j - 1], prev, &mut w);
        }
        let mut a_corr = a;
        for _ in 0..2 {
            coeffs.clear();
            coeffs.extend(basis.chunks_exact(n).map(|b| dot(b, &w)));
            for (b, &c) in basis.chunks_exact(n).zip(&coeffs) {
                axpy(-c, b, &mut w);
            }
            a_corr += coeffs[j];
        }
        alpha.push(a_corr);
        let steps = j + 1;
        let mut b = norm(&w);
        let scale = alpha.iter().chain(&beta).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let exhausted = steps == n;
        let breakdown = b <= 1e-13 * scale;

        if exhausted || steps == max_steps || steps % CHECK_EVERY == 0 || breakdown {
            let t = Tridiagonal {
                diag: alpha.clone(),
                off: beta.clone(),
            };
            if let Some(result) = extract(&t, b, &basis, n, opts, exhausted)? {
                return Ok(result);
            }
            if steps == max_steps {
                return Err(SpectraError::NonConvergence(format!(
                    "Lanczos did not reach residual {} within {max_steps} steps",
                    opts.tol
                )));
            }
        }
        if breakdown {
            // invariant subspace: restart in its orthogonal complement
            q = random_unit(&mut rng, n, &basis);
            b = 0.0;
        } else {
            q.iter_mut().zip(&w).for_each(|(qi, wi)| *qi = wi / b);
        }
        beta.push(b);
    }
}

fn extract(
    t: &Tridiagonal,
    b_last: f64,
    basis: &[f64],
    n: usize,
    opts: &LanczosOptions,
    exact: bool,
) -> Result<Option<ExtremalEigen>, SpectraError> {
    let k = t.order();
    if k < opts.n_top.max(opts.n_bottom) {
        return Ok(None);
    }
    let mut tt = t.clone();
    tql(&mut tt, None).map_err(|e| SpectraError::NonConvergence(format!("QL on Lanczos matrix: {} iterations", e.iterations)))?;
    let mut theta = tt.diag;
    theta.sort_by(|a, b| b.total_cmp(a));
    let top: Vec<f64> = theta[..opts.n_top].to_vec();
    let bottom: Vec<f64> = theta.iter().rev().take(opts.n_bottom).copied().collect();

    let mut max_residual = 0.0f64;
    let mut top_y = Vec::new();
    for (idx, &th) in top.iter().chain(&bottom).enumerate() {
        let y = ritz_coefficients(t, th);
        let res = if exact { 0.0 } else { (b_last * y[k - 1]).abs() };
        max_residual = max_residual.max(res);
        if max_residual > opts.tol {
            return Ok(None);
        }
        if idx < opts.n_top && opts.want_vectors {
            top_y.push(y);
        }
    }
    let top_vectors = opts.want_vectors.then(|| {
        let mut out = vec![0.0; opts.n_top * n];
        for (row, y) in out.chunks_exact_mut(n).zip(&top_y) {
            for (b, &c) in basis.chunks_exact(n).zip(y) {
                axpy(c, b, row);
            }
            let s = 1.0 / norm(row);
            row.iter_mut().for_each(|x| *x *= s);
        }
        out
    });
    Ok(Some(ExtremalEigen {
        top,
        bottom,
        top_vectors,
        steps: k,
        max_residual,
    }))
}

/// Unit eigenvector of the Lanczos matrix for the Ritz value `theta`, by
/// inverse iteration.
fn ritz_coefficients(t: &Tridiagonal, theta: f64) -> Vec<f64> {
    let k = t.order();
    let mut y: Vec<f64> = (0..k).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        shifted_solve(t, theta, &mut y);
        let s = 1.0 / norm(&y);
        y.iter_mut().for_each(|x| *x *= s);
    }
    y
}

fn random_unit(rng: &mut impl Rng, n: usize, basis: &[f64]) -> Vec<f64> {
    loop {
        let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for b in basis.chunks_exact(n) {
                let c = dot(b, &q);
                axpy(-c, b, &mut q);
            }
        }
        let nq = norm(&q);
        if nq > 1e-8 {
            q.iter_mut().for_each(|x| *x /= nq);
            return q;
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let chunks = n / 4 * 4;
    for c in (0..chunks).step_by(4) {
        for l in 0..4 {
            acc[l] += a[c + l] * b[c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in chunks..n {
        s += a[j] * b[j];
    }
    s
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
