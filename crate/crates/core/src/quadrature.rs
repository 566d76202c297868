//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

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
    0.209_482_141_084_728,
];

// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One GK15 panel: `(kronrod, |kronrod - gauss|)`.
pub fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-10, max_panels: 20_000 }
    }
}

/// Integral over `[a, b]` with panel breakpoints `breaks` (need not be sorted;
/// points outside `(a, b)` are ignored). Panels are bisected, largest error first,
/// until the summed error estimate meets the tolerance.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|x| *x > a.min(b) && *x < a.max(b)))
        .chain(std::iter::once(b))
        .collect();
    if b < a {
        pts[1..].sort_by(|x, y| y.total_cmp(x));
    } else {
        pts.sort_by(f64::total_cmp);
    }
    pts.dedup();
    let mut panels: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= tol.max_panels {
            return Err(Error::NonConvergence(format!(
                "quadrature on [{a}, {b}] stalled at error {err:.3e} after {} panels",
                panels.len()
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one panel");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_exact() {
        let (v, _) = gk15(&mut |x| x.powi(20) - 3.0 * x, -1.0, 2.0);
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 1.5 * (4.0 - 1.0);
        assert_relative_eq!(v, exact, max_relative = 1e-13);
    }

    #[test]
    fn oscillatory_and_singular_endpoint() {
        let v = integrate(&mut |x| (50.0 * x).cos(), 0.0, 1.0, &[], Tolerance::default()).unwrap();
        assert_relative_eq!(v, 50f64.sin() / 50.0, max_relative = 1e-10);
        let v = integrate(&mut |x: f64| x.sqrt().recip(), 1e-12, 1.0, &[], Tolerance::default()).unwrap();
        assert_relative_eq!(v, 2.0 - 2e-6, max_relative = 1e-9);
        let v = integrate(&mut |x| x, 1.0, 0.0, &[0.5], Tolerance::default()).unwrap();
        assert_relative_eq!(v, -0.5);
    }

    #[test]
    fn stalls_report_error() {
        let tol = Tolerance { abs: 0.0, rel: 1e-15, max_panels: 4 };
        assert!(integrate(&mut |x: f64| (1.0 / x).sin(), 1e-6, 1.0, &[], tol).is_err());
    }
}
