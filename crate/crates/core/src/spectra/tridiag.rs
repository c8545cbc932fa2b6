//! Householder tridiagonalization, implicit QL iteration and Sturm-sequence
//! bisection for real symmetric matrices.

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let n = self.diag.len();
        if n == 0 {
            return 0;
        }
        let emax = self.off.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let pivmin = f64::MIN_POSITIVE * (1.0f64).max(emax * emax);
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        let mut count = usize::from(q < 0.0);
        for i in 1..n {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            count += usize::from(q < 0.0);
        }
        count
    }

    /// The `k`-th largest eigenvalue (`k = 0` is the largest), by bisection
    /// on the Sturm count.
    pub fn kth_largest(&self, k: usize, tol: f64) -> f64 {
        let n = self.diag.len();
        assert!(k < n, "eigenvalue index out of range");
        let target = n - 1 - k;
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        let tol = tol.max(4.0 * f64::EPSILON * scale);
        // invariant: count(lo) <= target < count(hi)
        lo -= tol;
        hi += tol;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Reduces the symmetric matrix `a` (row-major, `n × n`) to tridiagonal form
/// `T = Qᵀ A Q`. Only the lower triangle of `a` is read. Returns `Q` in
/// row-major order when requested.
pub fn householder(a: &[f64], n: usize, want_q: bool) -> (Tridiagonal, Option<Vec<f64>>) {
    assert_eq!(a.len(), n * n);
    let mut w = a.to_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    if n == 0 {
        return (Tridiagonal { diag, off }, want_q.then(Vec::new));
    }
    if n <= 2 {
        diag[0] = w[0];
        if n == 2 {
            diag[1] = w[3];
            off[0] = w[2];
        }
        return (Tridiagonal { diag, off }, want_q.then(|| identity(n)));
    }

    let mut betas = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut vn = vec![0.0; n];
    let mut pn = vec![0.0; n];

    diag[0] = w[0];
    for i in 1..n {
        v[i] = w[i * n];
    }
    let (alpha, mut beta) = reflector(&mut v[1..]);
    off[0] = alpha;
    lower_symv(&w, n, 1, &v, &mut p);
    scale(&mut p[1..], beta);

    for k in 0..n - 2 {
        // p ← w = p − (β/2)(pᵀv) v
        if beta != 0.0 {
            let kk = 0.5 * beta * dot(&p[k + 1..], &v[k + 1..]);
            for i in k + 1..n {
                p[i] -= kk * v[i];
            }
        } else {
            p[k + 1..].iter_mut().for_each(|x| *x = 0.0);
        }
        for i in k + 1..n {
            w[i * n + k] = v[i];
        }
        betas[k] = beta;

        if k + 3 < n {
            for i in k + 1..n {
                w[i * n + k + 1] -= v[i] * p[k + 1] + p[i] * v[k + 1];
            }
            diag[k + 1] = w[(k + 1) * n + k + 1];
            vn[..k + 2].iter_mut().for_each(|x| *x = 0.0);
            for i in k + 2..n {
                vn[i] = w[i * n + k + 1];
            }
            let (alpha_n, beta_n) = reflector(&mut vn[k + 2..]);
            off[k + 1] = alpha_n;
            fused_update_symv(&mut w, n, k + 2, &v, &p, &vn, &mut pn);
            scale(&mut pn[k + 2..], beta_n);
            std::mem::swap(&mut v, &mut vn);
            std::mem::swap(&mut p, &mut pn);
            beta = beta_n;
        } else {
            for i in k + 1..n {
                for j in k + 1..=i {
                    w[i * n + j] -= v[i] * p[j] + p[i] * v[j];
                }
            }
            diag[n - 2] = w[(n - 2) * n + n - 2];
            diag[n - 1] = w[(n - 1) * n + n - 1];
            off[n - 2] = w[(n - 1) * n + n - 2];
        }
    }

    let q = want_q.then(|| accumulate_q(&w, n, &betas));
    (Tridiagonal { diag, off }, q)
}

fn identity(n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    q
}

/// Overwrites `x` with the Householder vector `v` such that
/// `(I − β v vᵀ) x = α e₁`; returns `(α, β)`.
fn reflector(x: &mut [f64]) -> (f64, f64) {
    let tail = x[1..].iter().map(|t| t * t).sum::<f64>();
    if tail == 0.0 {
        return (x[0], 0.0);
    }
    let x0 = x[0];
    let norm = (x0 * x0 + tail).sqrt();
    let alpha = if x0 >= 0.0 { -norm } else { norm };
    x[0] = x0 - alpha;
    let beta = 1.0 / (norm * (norm + x0.abs()));
    (alpha, beta)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
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

fn scale(x: &mut [f64], s: f64) {
    x.iter_mut().for_each(|t| *t *= s);
}

/// `p[lo..] = A[lo.., lo..] v[lo..]` using the lower triangle of `a`.
fn lower_symv(a: &[f64], n: usize, lo: usize, v: &[f64], p: &mut [f64]) {
    p.iter_mut().for_each(|x| *x = 0.0);
    for i in lo..n {
        let row = &a[i * n + lo..i * n + i];
        let vi = v[i];
        let vs = &v[lo..i];
        let ps = &mut p[lo..i];
        let mut s = 0.0;
        for ((r, x), y) in row.iter().zip(vs).zip(ps.iter_mut()) {
            s += r * x;
            *y += r * vi;
        }
        p[i] += s + a[i * n + i] * vi;
    }
}

/// Applies `A ← A − v wᵀ − w vᵀ` to rows and columns `lo..n` of the lower
/// triangle while accumulating `pn = A vn` for the updated block.
fn fused_update_symv(a: &mut [f64], n: usize, lo: usize, v: &[f64], w: &[f64], vn: &[f64], pn: &mut [f64]) {
    pn.iter_mut().for_each(|x| *x = 0.0);
    for i in lo..n {
        let m = i - lo;
        let (vi, wi, vni) = (v[i], w[i], vn[i]);
        let row = &mut a[i * n + lo..i * n + i + 1];
        let (row, diag) = row.split_at_mut(m);
        let ws = &w[lo..i];
        let vs = &v[lo..i];
        let vns = &vn[lo..i];
        let ps = &mut pn[lo..i];
        let mut acc = [0.0; 4];
        let chunks = m / 4 * 4;
        for c in (0..chunks).step_by(4) {
            for l in 0..4 {
                let j = c + l;
                let r = row[j] - vi * ws[j] - wi * vs[j];
                row[j] = r;
                acc[l] += r * vns[j];
                ps[j] += r * vni;
            }
        }
        let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        for j in chunks..m {
            let r = row[j] - vi * ws[j] - wi * vs[j];
            row[j] = r;
            s += r * vns[j];
            ps[j] += r * vni;
        }
        let d = diag[0] - 2.0 * vi * wi;
        diag[0] = d;
        pn[i] += s + d * vni;
    }
}

/// Backward accumulation `Q = H₀ H₁ ⋯ H_{n−3}` from reflectors stored below
/// the subdiagonal of `w`.
fn accumulate_q(w: &[f64], n: usize, betas: &[f64]) -> Vec<f64> {
    let mut q = identity(n);
    let mut u = vec![0.0; n];
    for k in (0..n - 2).rev() {
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        let lo = k + 1;
        u[lo..].iter_mut().for_each(|x| *x = 0.0);
        for i in lo..n {
            let vi = w[i * n + k];
            if vi == 0.0 {
                continue;
            }
            let row = &q[i * n + lo..(i + 1) * n];
            for (uj, r) in u[lo..].iter_mut().zip(row) {
                *uj += vi * r;
            }
        }
        for i in lo..n {
            let f = beta * w[i * n + k];
            if f == 0.0 {
                continue;
            }
            let row = &mut q[i * n + lo..(i + 1) * n];
            for (r, uj) in row.iter_mut().zip(&u[lo..]) {
                *r -= f * uj;
            }
        }
    }
    q
}

/// Implicit-shift QL iteration did not converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QlNonConvergence {
    pub iterations: usize,
}

/// Diagonalizes a tridiagonal matrix in place. On exit `d` holds the
/// (unsorted) eigenvalues. If `zt` is given (`n` rows of length `cols`),
/// row `i` is rotated as column `i` of the eigenvector matrix, so starting
/// from `Qᵀ` row `i` ends as the `i`-th eigenvector of `Q T Qᵀ`.
pub fn tql(t: &mut Tridiagonal, mut zt: Option<(&mut [f64], usize)>) -> Result<(), QlNonConvergence> {
    let n = t.diag.len();
    if n <= 1 {
        return Ok(());
    }
    let d = &mut t.diag;
    let mut e = t.off.clone();
    e.push(0.0);
    let limit = 30 * n;
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > limit {
                return Err(QlNonConvergence { iterations: total });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some((z, cols)) = zt.as_mut() {
                    let cols = *cols;
                    let (head, tail) = z.split_at_mut((i + 1) * cols);
                    rotate(&mut head[i * cols..], &mut tail[..cols], c, s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    t.off.iter_mut().for_each(|x| *x = 0.0);
    Ok(())
}

#[inline]
fn rotate(zi: &mut [f64], zi1: &mut [f64], c: f64, s: f64) {
    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
        let f = *b;
        *b = s * *a + c * f;
        *a = c * *a - s * f;
    }
}

/// Solves `(T − θ I) y = b` by Gaussian elimination with partial pivoting,
/// overwriting `b`. A zero pivot is replaced by a tiny multiple of ‖T‖.
pub fn shifted_solve(t: &Tridiagonal, theta: f64, b: &mut [f64]) {
    let n = t.diag.len();
    if n == 0 {
        return;
    }
    let norm = t.diag.iter().chain(&t.off).fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * norm;
    // rows hold (main, super, super2) after elimination
    let mut d: Vec<f64> = t.diag.iter().map(|x| x - theta).collect();
    let mut du: Vec<f64> = t.off.clone();
    du.push(0.0);
    let mut du2 = vec![0.0; n];
    let mut dl: Vec<f64> = t.off.clone();
    for i in 0..n - 1 {
        if dl[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            du2[i] = du[i + 1];
            du[i + 1] = -fact * du[i + 1];
            du[i] = tmp;
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        } else {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            du2[i] = 0.0;
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = next();
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn tridiagonal_similarity() {
        for n in [3, 4, 7, 20] {
            let a = random_symmetric(n, n as u64);
            let (t, q) = householder(&a, n, true);
            let q = q.unwrap();
            // Qᵀ A Q == T
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        for l in 0..n {
                            s += q[k * n + i] * a[k * n + l] * q[l * n + j];
                        }
                    }
                    let expected = if i == j {
                        t.diag[i]
                    } else if i + 1 == j {
                        t.off[i]
                    } else if j + 1 == i {
                        t.off[j]
                    } else {
                        0.0
                    };
                    assert!((s - expected).abs() < 1e-12, "n={n} ({i},{j}): {s} vs {expected}");
                }
            }
        }
    }

    #[test]
    fn sturm_and_ql_agree() {
        let n = 30;
        let a = random_symmetric(n, 11);
        let (t, _) = householder(&a, n, false);
        let mut t2 = t.clone();
        tql(&mut t2, None).unwrap();
        let mut eig = t2.diag.clone();
        eig.sort_by(|a, b| b.total_cmp(a));
        for (k, &lam) in eig.iter().enumerate() {
            assert!((t.kth_largest(k, 1e-14) - lam).abs() < 1e-12);
        }
    }

    #[test]
    fn shifted_solve_matches_dense() {
        let t = Tridiagonal {
            diag: vec![1.0, -2.0, 0.5, 3.0],
            off: vec![0.7, 5.0, -1.0],
        };
        let theta = 0.3;
        let x = [1.0, -1.0, 2.0, 0.5];
        let mut b = vec![0.0; 4];
        for i in 0..4 {
            b[i] = (t.diag[i] - theta) * x[i];
            if i > 0 {
                b[i] += t.off[i - 1] * x[i - 1];
            }
            if i < 3 {
                b[i] += t.off[i] * x[i + 1];
            }
        }
        shifted_solve(&t, theta, &mut b);
        for i in 0..4 {
            assert!((b[i] - x[i]).abs() < 1e-13);
        }
    }
}
