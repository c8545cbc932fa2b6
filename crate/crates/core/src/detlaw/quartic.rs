//! All four complex roots of a quartic, as eigenvalues of its balanced
//! companion matrix (shifted complex QR), refined by Newton steps on the
//! original polynomial.

use num_complex::Complex64;

const N: usize = 4;
type Mat = [[Complex64; N]; N];

/// Roots of `c[4] w⁴ + c[3] w³ + c[2] w² + c[1] w + c[0]`, `c[4] != 0`.
///
/// Returns `None` only if the QR iteration fails to converge.
pub fn quartic_roots(c: [Complex64; 5]) -> Option<[Complex64; 4]> {
    let lead = c[4];
    let mut h: Mat = [[Complex64::new(0.0, 0.0); N]; N];
    for j in 0..N {
        h[0][j] = -c[3 - j] / lead;
    }
    for i in 1..N {
        h[i][i - 1] = Complex64::new(1.0, 0.0);
    }
    balance(&mut h);
    let mut roots = hessenberg_eigenvalues(h)?;
    for r in roots.iter_mut() {
        *r = polish(&c, *r);
    }
    Some(roots)
}

/// Horner evaluation of the polynomial and its derivative.
#[inline]
pub fn eval_with_derivative(c: &[Complex64; 5], w: Complex64) -> (Complex64, Complex64) {
    let mut p = c[4];
    let mut dp = Complex64::new(0.0, 0.0);
    for k in (0..4).rev() {
        dp = dp * w + p;
        p = p * w + c[k];
    }
    (p, dp)
}

fn polish(c: &[Complex64; 5], mut w: Complex64) -> Complex64 {
    let (mut p, mut dp) = eval_with_derivative(c, w);
    for _ in 0..8 {
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = w - p / dp;
        let (pn, dpn) = eval_with_derivative(c, next);
        if pn.norm() >= p.norm() {
            break;
        }
        w = next;
        p = pn;
        dp = dpn;
    }
    w
}

/// Parlett–Reinsch diagonal balancing with powers of two.
fn balance(h: &mut Mat) {
    let radix = 2.0f64;
    loop {
        let mut converged = true;
        for i in 0..N {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..N {
                if j != i {
                    col += h[j][i].l1_norm();
                    row += h[i][j].l1_norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix * radix;
            }
            if (col + row) / f < 0.95 * total {
                converged = false;
                for j in 0..N {
                    h[i][j] /= f;
                    h[j][i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and deflation.
fn hessenberg_eigenvalues(mut h: Mat) -> Option<[Complex64; N]> {
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = [zero; N];
    let mut hi = N - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            break;
        }
        // Locate the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let scale = h[lo - 1][lo - 1].norm() + h[lo][lo].norm();
            if h[lo][lo - 1].norm() <= f64::EPSILON * scale {
                h[lo][lo - 1] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 200 {
            return None;
        }
        let shift = if iter % 11 == 0 {
            // exceptional shift
            h[hi][hi] + Complex64::new(0.75 * h[hi][hi - 1].norm(), 0.5 * h[hi][hi - 1].norm())
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Some(eig)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// One explicit shifted QR step `H − μ = QR, H ← RQ + μ` on the active block.
fn qr_step(h: &mut Mat, lo: usize, hi: usize, shift: Complex64) {
    let mut rot = [(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)); N];
    for k in lo..=hi {
        h[k][k] -= shift;
    }
    for k in lo..hi {
        let x = h[k][k];
        let y = h[k + 1][k];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (x / r, y / r)
        };
        rot[k] = (c, s);
        for j in k..=hi {
            let t1 = h[k][j];
            let t2 = h[k + 1][j];
            h[k][j] = c.conj() * t1 + s.conj() * t2;
            h[k + 1][j] = -s * t1 + c * t2;
        }
    }
    for k in lo..hi {
        let (c, s) = rot[k];
        for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(lo) {
            let t1 = row[k];
            let t2 = row[k + 1];
            row[k] = t1 * c + t2 * s;
            row[k + 1] = -t1 * s.conj() + t2 * c.conj();
        }
    }
    for k in lo..=hi {
        h[k][k] += shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(r: [Complex64; 4]) -> [Complex64; 5] {
        // expand Π (w − r_i)
        let mut p = vec![c(1.0, 0.0)];
        for &ri in &r {
            let mut next = vec![c(0.0, 0.0); p.len() + 1];
            for (k, &pk) in p.iter().enumerate() {
                next[k + 1] += pk;
                next[k] -= pk * ri;
            }
            p = next;
        }
        [p[0], p[1], p[2], p[3], p[4]]
    }

    fn assert_same_roots(found: [Complex64; 4], expected: [Complex64; 4], tol: f64) {
        let mut used = [false; 4];
        for e in expected {
            let (idx, dist) = found
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, f)| (i, (f - e).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < tol, "root {e} missing, closest distance {dist}");
            used[idx] = true;
        }
    }

    #[test]
    fn recovers_known_roots() {
        let roots = [c(1.0, 2.0), c(-0.5, 0.1), c(3.0, -1.0), c(0.0, -0.7)];
        let found = quartic_roots(from_roots(roots)).unwrap();
        assert_same_roots(found, roots, 1e-12);
    }

    #[test]
    fn widely_spread_roots() {
        let roots = [c(0.0, 100.0), c(0.0, -100.0), c(-0.6, 0.8), c(-0.6, -0.8)];
        let found = quartic_roots(from_roots(roots)).unwrap();
        assert_same_roots(found, roots, 1e-10);
    }

    #[test]
    fn real_quartic() {
        // (w² − 1)(w² − 4)
        let coeffs = [c(4.0, 0.0), c(0.0, 0.0), c(-5.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let found = quartic_roots(coeffs).unwrap();
        assert_same_roots(found, [c(1.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0)], 1e-12);
    }
}
