//! The deterministic refinement of the semicircle law for sparse models.
//!
//! `m̃(z)` is the root of `c₄ w⁴ + w² + z w + 1 = 0` lying in the upper half
//! plane with `|w| ≤ 5`, where `c₄ = e^{−2t} ξ⁽⁴⁾ / q²`. It is the Stieltjes
//! transform of a probability density `ρ̃` supported on `[−L, L]`, with
//! `L = 2 + c₄ + O(c₄²)`. For `c₄ = 0` everything reduces to the semicircle.

mod quartic;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::CumulantProfile;
use crate::quadrature::integrate;

pub use quartic::{eval_with_derivative, quartic_roots};

/// Largest |c₄| for which root selection has been validated on ℰ.
pub const MAX_C4: f64 = 0.25;
/// Most negative c₄ accepted (negative fourth cumulants of dense models).
pub const MIN_C4: f64 = -0.02;
/// Default Stieltjes-inversion height.
pub const ETA_FLOOR: f64 = 1e-9;
/// Densities below this are reported as zero outside `[−L, L]`.
pub const DENSITY_CLAMP: f64 = 1e-7;

const IM_TOLERANCE: f64 = 1e-12;
const MODULUS_BOUND: f64 = 5.0;
const TIE_TOLERANCE: f64 = 1e-10;
const EDGE_TOLERANCE: f64 = 1e-12;
const EDGE_IM_THRESHOLD: f64 = 1e-6;
const EDGE_UPPER: f64 = 2.999;
/// For c₄ < 0 the edge lies below 2; further out the spurious roots approach the physical pair.
const EDGE_UPPER_NEGATIVE: f64 = 2.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("invalid law parameter: {0}")]
    InvalidParameter(String),
    #[error("quartic coefficient c4 = {0} outside the supported range [{MIN_C4}, {MAX_C4}]")]
    UnsupportedCoefficient(f64),
    #[error("z = {re} + {im}i lies outside the domain |E| < 3, 0 < eta <= 3")]
    OutsideDomain { re: f64, im: f64 },
    #[error("root selection ambiguous at z = {re} + {im}i ({candidates} admissible roots)")]
    RootSelectionAmbiguous { re: f64, im: f64, candidates: usize },
    #[error("spectral edge not bracketed: density positive at the end of the search interval")]
    EdgeNotBracketed,
    #[error("companion-matrix QR iteration did not converge")]
    SolverFailure,
}

/// A spectral parameter `z = E + iη` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub energy: f64,
    pub eta: f64,
}

impl ComplexPoint {
    pub fn new(energy: f64, eta: f64) -> Result<Self, LawError> {
        if !(eta > 0.0) || !energy.is_finite() || !eta.is_finite() {
            return Err(LawError::InvalidParameter(format!(
                "spectral parameter {energy} + {eta}i is not in the upper half plane"
            )));
        }
        Ok(Self { energy, eta })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.energy, self.eta)
    }

    /// Membership in ℰ = {|E| < 3, 0 < η ≤ 3}.
    pub fn in_bulk_domain(&self) -> bool {
        self.energy.abs() < 3.0 && self.eta > 0.0 && self.eta <= 3.0
    }
}

impl From<ComplexPoint> for Complex64 {
    fn from(p: ComplexPoint) -> Self {
        p.z()
    }
}

/// Stieltjes transform of the semicircle law, on the branch with
/// `Im m_sc > 0` for `Im z > 0`.
pub fn msc(z: Complex64) -> Complex64 {
    let two = Complex64::new(2.0, 0.0);
    // sqrt(z−2)·sqrt(z+2) behaves like z at infinity on ℂ⁺.
    let s = (z - two).sqrt() * (z + two).sqrt();
    -2.0 / (z + s)
}

/// The refined law at a fixed flow time, with its spectral edge cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicLaw {
    xi4: f64,
    q: f64,
    t: f64,
    c4: f64,
    edge: f64,
}

impl DeterministicLaw {
    pub fn new(xi4: f64, q: f64, t: f64) -> Result<Self, LawError> {
        if !xi4.is_finite() || !(q > 0.0) || !q.is_finite() || !(t >= 0.0) || !t.is_finite() {
            return Err(LawError::InvalidParameter(format!(
                "xi4 = {xi4}, q = {q}, t = {t}"
            )));
        }
        let c4 = (-2.0 * t).exp() * xi4 / (q * q);
        if !(MIN_C4..=MAX_C4).contains(&c4) {
            return Err(LawError::UnsupportedCoefficient(c4));
        }
        let mut law = Self {
            xi4,
            q,
            t,
            c4,
            edge: 2.0,
        };
        law.edge = law.locate_edge()?;
        Ok(law)
    }

    /// Law with quartic coefficient `c4` directly (ξ⁽⁴⁾ = c₄, q = 1, t = 0).
    pub fn from_coefficient(c4: f64) -> Result<Self, LawError> {
        Self::new(c4, 1.0, 0.0)
    }

    pub fn from_profile(profile: &CumulantProfile, t: f64) -> Result<Self, LawError> {
        Self::new(profile.xi4, profile.q, t)
    }

    pub fn xi4(&self) -> f64 {
        self.xi4
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Effective quartic coefficient e^{−2t} ξ⁽⁴⁾ / q².
    pub fn c4(&self) -> f64 {
        self.c4
    }

    /// Right endpoint `L_t` of the support.
    pub fn edge(&self) -> f64 {
        self.edge
    }

    /// Leading-order edge `2 + c₄`.
    pub fn edge_asymptotic(&self) -> f64 {
        2.0 + self.c4
    }

    fn coefficients(&self, z: Complex64) -> [Complex64; 5] {
        let one = Complex64::new(1.0, 0.0);
        [one, z, one, Complex64::new(0.0, 0.0), Complex64::new(self.c4, 0.0)]
    }

    /// `P₁(w) = 1 + z w + w² + c₄ w⁴`.
    pub fn p1(&self, w: Complex64, z: Complex64) -> Complex64 {
        let w2 = w * w;
        1.0 + z * w + w2 + self.c4 * w2 * w2
    }

    /// `m̃(z)` for `z` in ℰ.
    pub fn mtilde(&self, z: Complex64) -> Result<Complex64, LawError> {
        if !(z.re.abs() < 3.0 && z.im > 0.0 && z.im <= 3.0) {
            return Err(LawError::OutsideDomain { re: z.re, im: z.im });
        }
        if self.c4 == 0.0 {
            return Ok(msc(z));
        }
        let roots = quartic_roots(self.coefficients(z)).ok_or(LawError::SolverFailure)?;
        select_root(&roots, z)
    }

    /// `ρ̃(E) = Im m̃(E + iη_floor)/π`, clamped to zero outside the support.
    pub fn rho(&self, energy: f64, eta_floor: f64) -> Result<f64, LawError> {
        let m = self.mtilde(Complex64::new(energy, eta_floor))?;
        let value = (m.im / PI).max(0.0);
        if energy.abs() >= self.edge && value < DENSITY_CLAMP {
            return Ok(0.0);
        }
        Ok(value)
    }

    /// `∫_{e1}^{e2} ρ̃`, by adaptive quadrature in the angle `E = L cos θ`,
    /// which removes the square-root behaviour at `±L`.
    pub fn integrated_density(&self, e1: f64, e2: f64) -> Result<f64, LawError> {
        let l = self.edge;
        let lo = e1.max(-l);
        let hi = e2.min(l);
        if lo >= hi {
            return Ok(0.0);
        }
        let theta_hi = (lo / l).clamp(-1.0, 1.0).acos();
        let theta_lo = (hi / l).clamp(-1.0, 1.0).acos();
        integrate(
            |theta: f64| {
                let e = l * theta.cos();
                Ok(self.rho(e, ETA_FLOOR)? * l * theta.sin())
            },
            theta_lo,
            theta_hi,
            1e-12,
        )
    }

    /// Evaluates `(P₁(m), P₂(m), P₁(m)·P₂(m))` at flow-time parameter `zeta`.
    pub fn eval_p(&self, m: Complex64, z: Complex64, zeta: f64) -> (Complex64, Complex64, Complex64) {
        let p1 = self.p1(m, z);
        let a = z + m + zeta * m;
        let p2 = a * a - zeta * (1.0 + m * z + m * m);
        (p1, p2, p1 * p2)
    }

    /// Bisection on the real axis for the point where the physical pair of
    /// roots of `P₁` turns from complex conjugate (inside the support) to
    /// real (outside).
    fn locate_edge(&self) -> Result<f64, LawError> {
        if self.c4 == 0.0 {
            return Ok(2.0);
        }
        let inside = |e: f64| -> Result<bool, LawError> { Ok(self.axis_imaginary_part(e)? > EDGE_IM_THRESHOLD) };
        let upper = if self.c4 < 0.0 { EDGE_UPPER_NEGATIVE } else { EDGE_UPPER };
        if inside(upper)? {
            return Err(LawError::EdgeNotBracketed);
        }
        let (mut lo, mut hi) = (0.0, upper);
        while hi - lo > EDGE_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if inside(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Largest |Im| among the two smallest-modulus roots of `P₁` at real `E`.
    fn axis_imaginary_part(&self, energy: f64) -> Result<f64, LawError> {
        let roots = quartic_roots(self.coefficients(Complex64::new(energy, 0.0)))
            .ok_or(LawError::SolverFailure)?;
        let mut sorted = roots;
        sorted.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        Ok(sorted[0].im.abs().max(sorted[1].im.abs()))
    }
}

/// Picks the physical root: `Im w > −1e−12`, `|w| ≤ 5`. When several roots
/// pass (large `c₄` lets the spurious pair `≈ ±i/√c₄` inside the disc), the
/// physical one belongs to the small-modulus pair that continues `m_sc`.
fn select_root(roots: &[Complex64; 4], z: Complex64) -> Result<Complex64, LawError> {
    let admissible = |w: &Complex64| w.im > -IM_TOLERANCE && w.norm() <= MODULUS_BOUND + 1e-6;
    let candidates: Vec<Complex64> = roots.iter().copied().filter(admissible).collect();
    let ambiguous = |n| LawError::RootSelectionAmbiguous {
        re: z.re,
        im: z.im,
        candidates: n,
    };
    match candidates.len() {
        0 => Err(ambiguous(0)),
        1 => Ok(candidates[0]),
        n => {
            let mut sorted = *roots;
            sorted.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            let small: Vec<Complex64> = sorted[..2].iter().copied().filter(admissible).collect();
            match small.as_slice() {
                [w] => Ok(*w),
                [a, b] if (a - b).norm() <= TIE_TOLERANCE => Ok(if a.im >= b.im { *a } else { *b }),
                _ => Err(ambiguous(n)),
            }
        }
    }
}
