//! Dense complex resolvent `G(z) = (H − z)⁻¹`.

use num_complex::Complex64;

use super::SpectraError;
use crate::model::SymMatrix;

/// Complex `n × n` matrix with separate real and imaginary planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[i * self.n + j], self.im[i * self.n + j])
    }
}

/// Inverts `H − z` by Gauss–Jordan elimination with partial pivoting.
pub fn resolvent(h: &SymMatrix, z: Complex64) -> Result<ComplexMatrix, SpectraError> {
    let n = h.order();
    let mut re = h.as_slice().to_vec();
    let mut im = vec![0.0; n * n];
    for i in 0..n {
        re[i * n + i] -= z.re;
        im[i * n + i] -= z.im;
    }
    let mut perm = vec![0usize; n];
    let mut row_re = vec![0.0; n];
    let mut row_im = vec![0.0; n];
    for k in 0..n {
        let mut p = k;
        let mut best = 0.0;
        for i in k..n {
            let m = re[i * n + k].hypot(im[i * n + k]);
            if m > best {
                best = m;
                p = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(SpectraError::Singular);
        }
        perm[k] = p;
        if p != k {
            swap_rows(&mut re, n, k, p);
            swap_rows(&mut im, n, k, p);
        }
        let piv = Complex64::new(re[k * n + k], im[k * n + k]);
        let inv = 1.0 / piv;
        re[k * n + k] = 1.0;
        im[k * n + k] = 0.0;
        for j in 0..n {
            let a = Complex64::new(re[k * n + j], im[k * n + j]) * inv;
            re[k * n + j] = a.re;
            im[k * n + j] = a.im;
        }
        row_re.copy_from_slice(&re[k * n..(k + 1) * n]);
        row_im.copy_from_slice(&im[k * n..(k + 1) * n]);
        for i in 0..n {
            if i == k {
                continue;
            }
            let fr = re[i * n + k];
            let fi = im[i * n + k];
            if fr == 0.0 && fi == 0.0 {
                continue;
            }
            re[i * n + k] = 0.0;
            im[i * n + k] = 0.0;
            let ri = &mut re[i * n..(i + 1) * n];
            let ii = &mut im[i * n..(i + 1) * n];
            for (((r, m), kr), ki) in ri.iter_mut().zip(ii.iter_mut()).zip(&row_re).zip(&row_im) {
                *r -= fr * kr - fi * ki;
                *m -= fr * ki + fi * kr;
            }
        }
    }
    for k in (0..n).rev() {
        let p = perm[k];
        if p != k {
            for i in 0..n {
                re.swap(i * n + k, i * n + p);
                im.swap(i * n + k, i * n + p);
            }
        }
    }
    Ok(ComplexMatrix { n, re, im })
}

fn swap_rows(a: &mut [f64], n: usize, i: usize, j: usize) {
    let (lo, hi) = (i.min(j), i.max(j));
    let (head, tail) = a.split_at_mut(hi * n);
    head[lo * n..(lo + 1) * n].swap_with_slice(&mut tail[..n]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let n = 7;
        let h = SymMatrix::from_upper(n, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0);
        let z = Complex64::new(0.3, 0.2);
        let g = resolvent(&h, z).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let hik = h.get(i, k) - if i == k { z } else { Complex64::new(0.0, 0.0) };
                    s += hik * g.get(k, j);
                }
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).norm() < 1e-12);
            }
        }
    }
}
