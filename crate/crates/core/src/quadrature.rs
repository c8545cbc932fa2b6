//! Adaptive Gauss–Kronrod (7/15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`. The integrand
/// may fail; the first error aborts the integration.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, E> {
    if a == b {
        return Ok(0.0);
    }
    let (k, g) = kronrod(&mut f, a, b)?;
    refine(&mut f, a, b, k, g, tol, 0)
}

fn kronrod<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<(f64, f64), E> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(centre - dx)? + f(centre + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok((k * half, g * half))
}

fn refine<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    k: f64,
    g: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, E> {
    if (k - g).abs() <= tol || depth >= MAX_DEPTH {
        return Ok(k);
    }
    let mid = 0.5 * (a + b);
    let (kl, gl) = kronrod(f, a, mid)?;
    let (kr, gr) = kronrod(f, mid, b)?;
    Ok(refine(f, a, mid, kl, gl, 0.5 * tol, depth + 1)?
        + refine(f, mid, b, kr, gr, 0.5 * tol, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn polynomial_and_sqrt_singularity() {
        let v = integrate(|x| Ok::<_, Infallible>(x * x * x), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let v = integrate(|x: f64| Ok::<_, Infallible>(x.sqrt()), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn semicircle_mass() {
        let rho = |x: f64| Ok::<_, Infallible>((4.0 - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI));
        let v = integrate(rho, -2.0, 2.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }
}
