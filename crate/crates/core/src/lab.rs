//! Inverse-closedness experiments on finite sections.
//!
//! Test matrices with prescribed polynomial off-diagonal decay are generated,
//! shifted to be well conditioned, inverted densely, and the decay of the
//! inverse is measured. Random entries are keyed by their lattice position and
//! offset, so a matrix generated on window `W` is the restriction of the one
//! generated on `2W` with the same seed.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, LatticeMatrix, Window};
use crate::norms::{op_norm_l2, polynomial_weight, MatrixNorm};
use crate::smoothness::AnyNorm;

/// Largest accepted condition number of a finite section.
pub const MAX_CONDITION: f64 = 1e10;
/// Largest accepted `|B B^-1 - I|_op`.
pub const MAX_RESIDUAL: f64 = 1e-8;
/// Shells needed for a decay fit.
pub const MIN_FIT_SHELLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    /// `A(k, l) = c (1 + |k - l|)^{-r}`.
    DeterministicEnvelope,
    /// Envelope times a uniform random phase.
    RandomPhase,
    /// Envelope times a uniform random factor in `[0, 1)`.
    RandomMagnitude,
}

impl fmt::Display for DecayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DeterministicEnvelope => "deterministic-envelope",
            Self::RandomPhase => "random-phase",
            Self::RandomMagnitude => "random-magnitude",
        })
    }
}

impl FromStr for DecayKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "det" | "deterministic" | "deterministic-envelope" => Ok(Self::DeterministicEnvelope),
            "phase" | "random-phase" => Ok(Self::RandomPhase),
            "mag" | "magnitude" | "random-magnitude" => Ok(Self::RandomMagnitude),
            other => Err(Error::Parse(format!("unknown decay model `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub kind: DecayKind,
    pub r: f64,
    pub c: f64,
    pub seed: u64,
}

impl DecayModel {
    pub fn new(kind: DecayKind, r: f64, c: f64, seed: u64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("decay exponent r = {r} must be finite and >= 0")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude c = {c} must be positive")));
        }
        Ok(Self { kind, r, c, seed })
    }

    /// `c (1 + |m|_2)^{-r}`.
    pub fn envelope(&self, m: &LatticeIndex) -> f64 {
        self.c / polynomial_weight(m, self.r)
    }
}

fn encode(k: &LatticeIndex) -> u64 {
    let c = k.coords();
    let lo = (c[0] + (1 << 31)) as u64 & 0xffff_ffff;
    let hi = c.get(1).map_or(0, |x| (x + (1 << 31)) as u64 & 0xffff_ffff);
    lo | (hi << 32)
}

/// Uniform draw in `[0, 1)` attached to entry `(k, k - m)`.
fn entry_draw(base: &ChaCha8Rng, m: &LatticeIndex, k: &LatticeIndex) -> f64 {
    let mut rng = base.clone();
    rng.set_stream(encode(m));
    rng.set_word_pos(2 * encode(k) as u128);
    rng.random::<f64>()
}

/// Matrix on `[-W, W]^d` following the model.
pub fn generate(model: &DecayModel, dim: usize, half: usize) -> Result<LatticeMatrix> {
    let window = Window::new(dim, half)?;
    let base = ChaCha8Rng::seed_from_u64(model.seed);
    let diagonals = window.all_offsets().into_iter().map(|m| {
        let env = model.envelope(&m);
        let mut entries = vec![Complex64::new(0.0, 0.0); window.diag_len(&m)];
        window.for_each_position(&m, |i, row, _| {
            let k = window.point(row);
            entries[i] = match model.kind {
                DecayKind::DeterministicEnvelope => Complex64::new(env, 0.0),
                DecayKind::RandomPhase => {
                    let theta = 2.0 * std::f64::consts::PI * entry_draw(&base, &m, &k);
                    let z = Complex64::from_polar(env, theta);
                    // keep |z| <= env despite rounding in cos/sin
                    let n = z.norm();
                    if n > env { z * (env / n) } else { z }
                }
                DecayKind::RandomMagnitude => Complex64::new(env * entry_draw(&base, &m, &k), 0.0),
            };
        });
        (m, entries)
    });
    LatticeMatrix::from_diagonals(dim, half, diagonals)
}

/// `B = lambda |A|_op I + A`, invertible with condition at most `(lambda+1)/(lambda-1)`.
pub fn make_invertible(a: &LatticeMatrix, lambda: f64) -> Result<LatticeMatrix> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("margin lambda = {lambda} must exceed 1")));
    }
    if a.is_zero() {
        return Err(Error::Degenerate("cannot shift the zero matrix by a multiple of its norm".into()));
    }
    let shift = lambda * op_norm_l2(a);
    let id = LatticeMatrix::identity(a.dim(), a.half_width())?;
    a.add(&id.scale(Complex64::new(shift, 0.0)))
}

/// Inverse of the finite section together with its spectral condition number.
pub fn invert_with_condition(b: &LatticeMatrix) -> Result<(LatticeMatrix, f64)> {
    let dense_b = b.to_dense();
    let n = dense_b.nrows();
    let norm_b = dense::spectral_norm(&dense_b);
    let inv = match dense::inverse(&dense_b) {
        Some(inv) if norm_b > 0.0 => inv,
        _ => return Err(Error::SingularSection { condition: f64::INFINITY }),
    };
    let condition = norm_b * dense::spectral_norm(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSection { condition });
    }
    let resid = dense::matmul(&dense_b, &inv) - DMatrix::<Complex64>::identity(n, n);
    // Frobenius bounds the operator norm; only fall back to the exact value when needed
    if resid.norm() > MAX_RESIDUAL && dense::spectral_norm(&resid) > MAX_RESIDUAL {
        return Err(Error::NonConvergence(format!(
            "finite-section inverse residual {:.3e} exceeds {MAX_RESIDUAL:e}",
            dense::spectral_norm(&resid)
        )));
    }
    Ok((LatticeMatrix::from_dense(b.dim(), b.half_width(), &inv)?, condition))
}

/// Dense LU inverse of the window.
pub fn invert_finite_section(b: &LatticeMatrix) -> Result<LatticeMatrix> {
    invert_with_condition(b).map(|(inv, _)| inv)
}

/// Range of `|m|_inf` shells used for fitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: usize,
    pub hi: usize,
}

impl FitWindow {
    /// Shells `1 ..= floor(3W/2)`: the main diagonal and the outer quarter of
    /// offsets are left out.
    pub fn for_half_width(half: usize) -> Self {
        Self { lo: 1, hi: (3 * half) / 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    LineFit { slope, intercept, residual: (sse / n).sqrt() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `(shell, d)` with `d = max |A(k, k-m)|` over `|m|_inf = shell` and
    /// interior rows `|k|_inf <= W/2`.
    pub envelope: Vec<(usize, f64)>,
    pub window: FitWindow,
    /// Fit of `log d` against `log(1 + shell)`.
    pub loglog: LineFit,
    /// Fit of `log d` against `shell`.
    pub semilog: LineFit,
    /// `-slope` of the log-log fit.
    pub exponent: f64,
    /// Set when the semilog line fits better, i.e. decay looks exponential.
    pub super_polynomial: bool,
}

/// Envelope over interior rows by `|m|_inf` shell.
pub fn envelope(a: &LatticeMatrix) -> Vec<(usize, f64)> {
    let window = a.window();
    let interior = (a.half_width() / 2) as u64;
    let mut env = vec![0.0f64; window.max_offset() + 1];
    for (m, d) in a.diagonals() {
        let shell = m.sup_norm() as usize;
        let e = d.entries();
        window.for_each_position(m, |i, row, _| {
            if window.point(row).sup_norm() <= interior {
                env[shell] = env[shell].max(e[i].norm());
            }
        });
    }
    env.into_iter().enumerate().collect()
}

/// Envelope and fitted decay exponent.
pub fn decay_profile(a: &LatticeMatrix, window: Option<FitWindow>) -> Result<DecayProfile> {
    let window = window.unwrap_or_else(|| FitWindow::for_half_width(a.half_width()));
    if window.lo == 0 || window.lo > window.hi {
        return Err(Error::InvalidParameter(format!(
            "fit window {}..={} must satisfy 1 <= lo <= hi",
            window.lo, window.hi
        )));
    }
    let env = envelope(a);
    let points: Vec<(usize, f64)> = env
        .iter()
        .copied()
        .filter(|(s, _)| *s >= window.lo && *s <= window.hi)
        .collect();
    let found = points.iter().filter(|(_, d)| *d > 0.0).count();
    if found < MIN_FIT_SHELLS {
        return Err(Error::InsufficientDiagonals { found, needed: MIN_FIT_SHELLS });
    }
    let ys: Vec<f64> = points.iter().map(|(_, d)| d.max(1e-300).ln()).collect();
    let log_x: Vec<f64> = points.iter().map(|(s, _)| (1.0 + *s as f64).ln()).collect();
    let lin_x: Vec<f64> = points.iter().map(|(s, _)| *s as f64).collect();
    let loglog = least_squares(&log_x, &ys);
    let semilog = least_squares(&lin_x, &ys);
    Ok(DecayProfile {
        envelope: env,
        window,
        exponent: -loglog.slope,
        super_polynomial: semilog.residual < loglog.residual,
        loglog,
        semilog,
    })
}

/// Norms of `B` and `B^-1` under one norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    pub norm: String,
    pub b: f64,
    pub b_inv: f64,
}

/// One `(model, W)` cell of the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceCell {
    pub half_width: usize,
    pub shift: f64,
    pub condition: f64,
    pub profile_b: DecayProfile,
    pub profile_b_inv: DecayProfile,
    pub norms: Vec<NormPair>,
}

/// Relative change of `|B^-1|` between the two largest windows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub norm: String,
    pub relative_change: f64,
    /// `|B^-1|` values never decrease by more than round-off and never grow
    /// faster from one window to the next than in the previous step.
    pub settling: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub model: DecayModel,
    pub dim: usize,
    pub lambda: f64,
    pub cells: Vec<InvarianceCell>,
    pub stability: Vec<Stability>,
}

/// Smallest window accepted by the report.
pub const MIN_REPORT_HALF_WIDTH: usize = 16;

fn run_cell(model: &DecayModel, dim: usize, half: usize, lambda: f64, norms: &[AnyNorm]) -> Result<InvarianceCell> {
    let a = generate(model, dim, half)?;
    let shift = lambda * op_norm_l2(&a);
    let b = make_invertible(&a, lambda)?;
    let (b_inv, condition) = invert_with_condition(&b)?;
    Ok(InvarianceCell {
        half_width: half,
        shift,
        condition,
        profile_b: decay_profile(&b, None)?,
        profile_b_inv: decay_profile(&b_inv, None)?,
        norms: norms
            .iter()
            .map(|n| NormPair { norm: n.label(), b: n.norm(&b), b_inv: n.norm(&b_inv) })
            .collect(),
    })
}

/// Generate, shift, invert and profile the model on each window.
pub fn spectral_invariance_report(
    model: &DecayModel,
    dim: usize,
    half_widths: &[usize],
    lambda: f64,
    norms: &[AnyNorm],
) -> Result<InvarianceReport> {
    if half_widths.is_empty() {
        return Err(Error::InvalidParameter("window sequence is empty".into()));
    }
    if half_widths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("window sequence must be strictly increasing".into()));
    }
    if let Some(w) = half_widths.iter().find(|w| **w < MIN_REPORT_HALF_WIDTH) {
        return Err(Error::InvalidParameter(format!(
            "window half-width {w} below the minimum {MIN_REPORT_HALF_WIDTH}"
        )));
    }
    let cells = half_widths
        .par_iter()
        .map(|&w| run_cell(model, dim, w, lambda, norms))
        .collect::<Result<Vec<_>>>()?;
    let stability = (0..norms.len())
        .map(|i| {
            let vals: Vec<f64> = cells.iter().map(|c| c.norms[i].b_inv).collect();
            let n = vals.len();
            let relative_change = if n < 2 { 0.0 } else { (vals[n - 1] - vals[n - 2]).abs() / vals[n - 1] };
            let steps: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
            let settling = steps.iter().all(|s| *s >= -1e-12 * vals[n - 1])
                && steps.windows(2).all(|s| s[1] <= s[0] + 1e-12 * vals[n - 1]);
            Stability { norm: norms[i].label(), relative_change, settling }
        })
        .collect();
    Ok(InvarianceReport { model: *model, dim, lambda, cells, stability })
}

/// Model parameters of the seeded test corpus: kinds cycle through the three
/// models, `r` is uniform in `[2.5, 4]` and `c` uniform in `[0.5, 2]`.
pub fn corpus_models(seed: u64, size: usize) -> Vec<DecayModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [DecayKind::DeterministicEnvelope, DecayKind::RandomPhase, DecayKind::RandomMagnitude];
    (0..size)
        .map(|i| DecayModel {
            kind: kinds[i % 3],
            r: rng.random_range(2.5..=4.0),
            c: rng.random_range(0.5..=2.0),
            seed: rng.random(),
        })
        .collect()
}

/// Seeded corpus of decay matrices on `[-W, W]^d`. Doubling `W` extends every
/// matrix without changing the entries already present.
pub fn corpus(seed: u64, size: usize, dim: usize, half: usize) -> Result<Vec<LatticeMatrix>> {
    corpus_models(seed, size).iter().map(|m| generate(m, dim, half)).collect()
}
