//! Bessel potentials on side diagonals and the hypersingular-integral norm.
//!
//! The Bessel kernel `G_r` acts on diagonal `m` as the multiplier
//! `(1 + |2 pi m|^2)^{-r/2}`, so the Bessel potential norm of `A` is the base
//! norm of `A` with diagonal `m` scaled by `v*_r(m)`. The hypersingular form
//! `|A| + sup_eps |int_{eps <= |t| <= 1} Delta_t(A) |t|^{-r} dt / |t|^d|` is a
//! second evaluator: it is again a diagonal multiplier
//!
//! ```text
//! mu_eps(m) = int_{eps <= |t|_2 <= 1} (e^{2 pi i m.t} - 1) |t|_2^{-r-d} dt,
//! ```
//!
//! real and nonpositive, computed by quadrature on dyadic shells.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, LatticeMatrix};
use crate::norms::{bessel_weight, Exponent, MatrixNorm, NormSpec, WeightSpec};
use crate::quadrature::{integrate, Tolerance};
use crate::smoothness::{besov_norm_solid_lp, SolidLpBesov};

/// `(1 + |2 pi m|^2)^{-r/2}`.
pub fn bessel_factor(m: &LatticeIndex, r: f64) -> f64 {
    bessel_weight(m, -r)
}

fn check_order(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Bessel order r = {r} must be positive")))
    }
}

/// `G_r * A`: diagonal `m` scaled by `(1 + |2 pi m|^2)^{-r/2}`.
pub fn bessel_convolve(a: &LatticeMatrix, r: f64) -> Result<LatticeMatrix> {
    check_order(r)?;
    Ok(a.map_diagonals(|m| Complex64::new(bessel_factor(m, r), 0.0)))
}

/// Bessel potential norm: the base norm with diagonal `m` weighted by `v*_r(m)`.
pub fn bessel_norm(a: &LatticeMatrix, r: f64, base: &NormSpec) -> Result<f64> {
    check_order(r)?;
    Ok(NormSpec::weighted(base.clone(), WeightSpec::Bessel(r))?.norm(a))
}

/// Quadrature state for the hypersingular multipliers.
pub struct HypersingularQuadrature {
    dim: usize,
    r: f64,
    levels: u32,
    max_levels: u32,
    tol: Tolerance,
    /// Keyed by `|m|` (d = 1) or `|m|_2^2` (d = 2); entry `j-1` is `mu_{2^-j}`.
    cache: Mutex<HashMap<u64, Vec<f64>>>,
}

/// Relative spread of the last three seminorm values accepted as stable.
pub const STABILITY_TOL: f64 = 5e-3;

impl HypersingularQuadrature {
    /// Epsilon grid `2^-1, ..., 2^-12`, extendable up to `2^-60`.
    pub fn new(dim: usize, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 2.0) {
            return Err(Error::InvalidParameter(format!("hypersingular norm needs 0 < r < 2, got {r}")));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDim(dim));
        }
        Ok(Self {
            dim,
            r,
            levels: 12,
            max_levels: 60,
            tol: Tolerance::default(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Initial number of epsilon levels.
    pub fn with_levels(mut self, levels: u32) -> Self {
        self.levels = levels.clamp(3, self.max_levels);
        self
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    fn key(&self, m: &LatticeIndex) -> u64 {
        let c = m.coords();
        match self.dim {
            1 => c[0].unsigned_abs(),
            _ => (c[0] * c[0] + c[1] * c[1]) as u64,
        }
    }

    /// Integral of the shell `lo <= |t| <= hi`.
    fn shell(&self, key: u64, lo: f64, hi: f64) -> Result<f64> {
        let s = -self.r - 1.0;
        match self.dim {
            1 => {
                let m = key as f64;
                // two half-lines; cos(2 pi m t) - 1 = -2 sin^2(pi m t)
                let mut f = |t: f64| -4.0 * (PI * m * t).sin().powi(2) * t.powf(s);
                let breaks: Vec<f64> = ((lo * m).ceil() as i64..=(hi * m).floor() as i64)
                    .map(|j| j as f64 / m)
                    .collect();
                integrate(&mut f, lo, hi, &breaks, self.tol)
            }
            _ => {
                let m = (key as f64).sqrt();
                let x = 2.0 * PI * m;
                // angular integral of cos(x rho cos phi) - 1 by the periodic trapezoid rule
                let mut f = |rho: f64| {
                    let z = x * rho;
                    let n = (z + 10.0 * z.cbrt()).ceil() as usize + 16;
                    let h = 2.0 * PI / n as f64;
                    let ang: f64 = (0..n)
                        .map(|i| -2.0 * (0.5 * z * (i as f64 * h).cos()).sin().powi(2))
                        .sum::<f64>()
                        * h;
                    ang * rho.powf(s)
                };
                let breaks: Vec<f64> = ((lo * m).ceil() as i64..=(hi * m).floor() as i64)
                    .map(|j| j as f64 / m)
                    .collect();
                integrate(&mut f, lo, hi, &breaks, self.tol)
            }
        }
    }

    /// `mu_{2^-j}(m)` for `j = 1 ..= levels`.
    pub fn multipliers(&self, m: &LatticeIndex, levels: u32) -> Result<Vec<f64>> {
        let key = self.key(m);
        if key == 0 {
            return Ok(vec![0.0; levels as usize]);
        }
        let have = {
            let cache = self.cache.lock().expect("multiplier cache poisoned");
            cache.get(&key).cloned().unwrap_or_default()
        };
        if have.len() >= levels as usize {
            return Ok(have[..levels as usize].to_vec());
        }
        let mut vals = have;
        let mut acc = vals.last().copied().unwrap_or(0.0);
        for j in vals.len() as i32 + 1..=levels as i32 {
            acc += self.shell(key, 2f64.powi(-j), 2f64.powi(1 - j))?;
            vals.push(acc);
        }
        self.cache
            .lock()
            .expect("multiplier cache poisoned")
            .insert(key, vals.clone());
        Ok(vals)
    }

    /// Rows `(m, eps, mu_eps(m))` for every stored diagonal of `A`.
    pub fn multiplier_table(&self, a: &LatticeMatrix, levels: u32) -> Result<Vec<(LatticeIndex, f64, f64)>> {
        let mut rows = Vec::new();
        for (m, _) in a.diagonals() {
            for (j, mu) in self.multipliers(m, levels)?.into_iter().enumerate() {
                rows.push((*m, 2f64.powi(-(j as i32 + 1)), mu));
            }
        }
        Ok(rows)
    }
}

/// Output of [`hypersingular_norm`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypersingularReport {
    pub value: f64,
    pub base_norm: f64,
    /// `(eps, seminorm at eps)` over the grid actually used.
    pub seminorms: Vec<(f64, f64)>,
    /// Relative spread of the last three seminorm values.
    pub spread: f64,
}

/// `|A| + max_eps |mu_eps . A|`, extending the epsilon grid by four levels at a
/// time until the last three seminorm values agree within 0.5%.
pub fn hypersingular_norm(a: &LatticeMatrix, base: &dyn MatrixNorm, quad: &HypersingularQuadrature) -> Result<HypersingularReport> {
    if a.dim() != quad.dim {
        return Err(Error::InvalidParameter(format!(
            "quadrature built for d = {}, matrix has d = {}",
            quad.dim,
            a.dim()
        )));
    }
    let base_norm = base.norm(a);
    let mut levels = quad.levels;
    loop {
        let mut table: HashMap<LatticeIndex, Vec<f64>> = HashMap::new();
        for (m, _) in a.diagonals() {
            table.insert(*m, quad.multipliers(m, levels)?);
        }
        let seminorms: Vec<(f64, f64)> = (0..levels as usize)
            .map(|j| {
                let v = base.norm_scaled(a, &|m| Complex64::new(table.get(m).map_or(0.0, |t| t[j]), 0.0));
                (2f64.powi(-(j as i32 + 1)), v)
            })
            .collect();
        let tail: Vec<f64> = seminorms[seminorms.len() - 3..].iter().map(|x| x.1).collect();
        let top = seminorms.iter().map(|x| x.1).fold(0.0, f64::max);
        let spread = if top == 0.0 { 0.0 } else { (tail[2] - tail[0]).abs() / top };
        let monotone = tail[1] >= tail[0] * (1.0 - 1e-12) && tail[2] >= tail[1] * (1.0 - 1e-12);
        if monotone && spread < STABILITY_TOL {
            return Ok(HypersingularReport { value: base_norm + top, base_norm, seminorms, spread });
        }
        if levels >= quad.max_levels {
            return Err(Error::NonConvergence(format!(
                "hypersingular seminorm not stable at eps = 2^-{levels} (spread {spread:.3e})"
            )));
        }
        levels = (levels + 4).min(quad.max_levels);
    }
}

/// Output of [`embedding_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    /// Besov norm with `p = 1` (solid Littlewood-Paley form).
    pub besov_1: f64,
    pub bessel: f64,
    /// Besov norm with `p = inf`.
    pub besov_inf: f64,
    /// `bessel / besov_1`; bounded iff the first embedding holds.
    pub lower_ratio: f64,
    /// `besov_inf / bessel`; bounded iff the second embedding holds.
    pub upper_ratio: f64,
    pub hypersingular: Option<f64>,
    /// `hypersingular / bessel`.
    pub hypersingular_ratio: Option<f64>,
}

/// Norms along the chain `Lambda^1_r -> P_r -> Lambda^inf_r` for a solid base.
/// The hypersingular evaluator is added when a quadrature of the same order is given.
pub fn embedding_check(
    a: &LatticeMatrix,
    r: f64,
    base: &NormSpec,
    quad: Option<&HypersingularQuadrature>,
) -> Result<EmbeddingReport> {
    let besov_1 = besov_norm_solid_lp(a, base, r, Exponent::Finite(1.0))?;
    let bessel = bessel_norm(a, r, base)?;
    let besov_inf = besov_norm_solid_lp(a, base, r, Exponent::Infinite)?;
    let hypersingular = match quad {
        Some(q) => {
            if q.r != r {
                return Err(Error::InvalidParameter(format!("quadrature order {} differs from r = {r}", q.r)));
            }
            Some(hypersingular_norm(a, base, q)?.value)
        }
        None => None,
    };
    Ok(EmbeddingReport {
        besov_1,
        bessel,
        besov_inf,
        lower_ratio: bessel / besov_1,
        upper_ratio: besov_inf / bessel,
        hypersingular,
        hypersingular_ratio: hypersingular.map(|h| h / bessel),
    })
}

/// Besov norm of smoothness `s` over the Bessel-weighted base, against the
/// Besov norm of smoothness `r + s` over the base (solid forms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BesselBesovReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn bessel_on_besov(a: &LatticeMatrix, base: &NormSpec, r: f64, s: f64, p: Exponent) -> Result<BesselBesovReport> {
    check_order(r)?;
    let weighted = NormSpec::weighted(base.clone(), WeightSpec::Bessel(r))?;
    let lhs = SolidLpBesov { base: &weighted, r: s, p }.norm(a);
    let rhs = besov_norm_solid_lp(a, base, r + s, p)?;
    Ok(BesselBesovReport { lhs, rhs, ratio: lhs / rhs })
}
