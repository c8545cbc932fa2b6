//! Slow, independent reference implementations used to cross-check the main
//! solvers.

use num_complex::Complex64;

use crate::detlaw::msc;
use crate::model::SymMatrix;

/// Eigenvalues by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(h: &SymMatrix) -> Vec<f64> {
    let n = h.order();
    let mut a = h.as_slice().to_vec();
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = a[p * n + r];
                if apr == 0.0 {
                    continue;
                }
                let theta = (a[r * n + r] - a[p * n + p]) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akr = a[k * n + r];
                    a[k * n + p] = c * akp - s * akr;
                    a[k * n + r] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let ark = a[r * n + k];
                    a[p * n + k] = c * apk - s * ark;
                    a[r * n + k] = s * apk + c * ark;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    d.sort_by(|x, y| y.total_cmp(x));
    d
}

/// Double-double real number.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Dd { hi, lo }
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }
}

#[derive(Debug, Clone, Copy)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn from(z: Complex64) -> Self {
        Cdd { re: Dd::from(z.re), im: Dd::from(z.im) }
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }

    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn div(self, o: Cdd) -> Cdd {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(Cdd { re: o.re, im: o.im.neg() });
        Cdd { re: num.re.div(den), im: num.im.div(den) }
    }

    fn abs_approx(self) -> f64 {
        self.to_c64().norm()
    }
}

/// All roots of `c₄ w⁴ + w² + z w + 1` by Durand–Kerner iteration in
/// double-double complex arithmetic.
pub fn quartic_roots_hp(c4: f64, z: Complex64) -> [Complex64; 4] {
    let lead = Dd::from(c4);
    let coef = [
        Cdd { re: Dd::from(1.0).div(lead), im: Dd::ZERO },
        Cdd { re: Dd::from(z.re).div(lead), im: Dd::from(z.im).div(lead) },
        Cdd { re: Dd::from(1.0).div(lead), im: Dd::ZERO },
        Cdd { re: Dd::ZERO, im: Dd::ZERO },
    ];
    let eval = |w: Cdd| {
        let mut acc = Cdd { re: Dd::from(1.0), im: Dd::ZERO };
        for c in coef.iter().rev() {
            acc = acc.mul(w).add(*c);
        }
        acc
    };
    let radius = 1.0 + (1.0 / c4.abs()).sqrt() + (z.norm() / c4.abs()).cbrt();
    let seed = Complex64::new(0.4, 0.9);
    let mut w: Vec<Cdd> = (0..4).map(|k| Cdd::from(seed.powu(k as u32 + 1) * radius * 0.5)).collect();
    for _ in 0..2000 {
        let mut step_max: f64 = 0.0;
        for i in 0..4 {
            let mut den = Cdd { re: Dd::from(1.0), im: Dd::ZERO };
            for j in 0..4 {
                if i != j {
                    den = den.mul(w[i].sub(w[j]));
                }
            }
            let step = eval(w[i]).div(den);
            w[i] = w[i].sub(step);
            step_max = step_max.max(step.abs_approx() / w[i].abs_approx().max(1.0));
        }
        if step_max < 1e-30 {
            break;
        }
    }
    [w[0].to_c64(), w[1].to_c64(), w[2].to_c64(), w[3].to_c64()]
}

/// The upper-half-plane root of the quartic nearest the semicircle value.
pub fn mtilde_oracle(c4: f64, z: Complex64) -> Complex64 {
    if c4 == 0.0 {
        return msc(z);
    }
    let reference = msc(z);
    quartic_roots_hp(c4, z)
        .into_iter()
        .filter(|w| w.im > 0.0)
        .min_by(|a, b| (a - reference).norm().total_cmp(&(b - reference).norm()))
        .expect("an upper-half-plane root exists")
}

/// Cumulants κ₁..κ₄ of the two-point law `(1−p)/σ` w.p. `p`, `−p/σ`
/// otherwise, from its raw moments.
pub fn two_point_cumulants(p: f64, sigma: f64) -> [f64; 4] {
    let outcomes = [((1.0 - p) / sigma, p), (-p / sigma, 1.0 - p)];
    let mut m = [0.0; 5];
    for (x, w) in outcomes {
        for (k, mk) in m.iter_mut().enumerate() {
            *mk += w * x.powi(k as i32);
        }
    }
    let (m1, m2, m3, m4) = (m[1], m[2], m[3], m[4]);
    [
        m1,
        m2 - m1 * m1,
        m3 - 3.0 * m2 * m1 + 2.0 * m1.powi(3),
        m4 - 4.0 * m3 * m1 - 3.0 * m2 * m2 + 12.0 * m2 * m1 * m1 - 6.0 * m1.powi(4),
    ]
}

/// Right spectral edge as the real double root of `1 + E w + w² + c₄ w⁴`,
/// by two-dimensional Newton iteration from `(w, E) = (−1, 2)`.
pub fn edge_double_root(c4: f64) -> Option<f64> {
    let (mut w, mut e) = (-1.0_f64, 2.0_f64);
    for _ in 0..200 {
        let f1 = 1.0 + e * w + w * w + c4 * w.powi(4);
        let f2 = e + 2.0 * w + 4.0 * c4 * w.powi(3);
        let (a11, a12) = (e + 2.0 * w + 4.0 * c4 * w.powi(3), w);
        let (a21, a22) = (2.0 + 12.0 * c4 * w * w, 1.0);
        let det = a11 * a22 - a12 * a21;
        if det == 0.0 {
            return None;
        }
        let dw = (f1 * a22 - a12 * f2) / det;
        let de = (a11 * f2 - a21 * f1) / det;
        w -= dw;
        e -= de;
        if dw.abs() + de.abs() < 1e-15 {
            return Some(e);
        }
    }
    None
}

/// Unbiased sample cumulants `(k₂, k₄)` (Fisher's k-statistics).
pub fn sample_cumulants(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut s2, mut s4) = (0.0, 0.0);
    for v in x {
        let d = v - mean;
        s2 += d * d;
        s4 += d.powi(4);
    }
    let m2 = s2 / n;
    let m4 = s4 / n;
    let k2 = n / (n - 1.0) * m2;
    let k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    (k2, k4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_and_2x2() {
        let h = SymMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = jacobi_eigenvalues(&h);
        assert!((e[0] - 3.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dd_division_is_accurate() {
        let third = Dd::from(1.0).div(Dd::from(3.0));
        let back = third.mul(Dd::from(3.0)).sub(Dd::from(1.0));
        assert!(back.hi.abs() < 1e-30);
    }

    #[test]
    fn hp_roots_satisfy_quartic() {
        let z = Complex64::new(0.3, 0.2);
        for r in quartic_roots_hp(0.05, z) {
            let v = 1.0 + z * r + r * r + 0.05 * r.powu(4);
            assert!(v.norm() < 1e-12, "{v}");
        }
    }

    #[test]
    fn edge_oracle_small_c4() {
        let l = edge_double_root(1e-4).unwrap();
        assert!((l - 2.0 - 1e-4).abs() < 1e-7);
    }

    #[test]
    fn two_point_moments() {
        let k = two_point_cumulants(0.5, 1.0);
        assert!(k[0].abs() < 1e-15);
        assert!((k[1] - 0.25).abs() < 1e-15);
        assert!((k[3] + 0.125).abs() < 1e-15);
    }
}
