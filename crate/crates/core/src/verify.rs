//! Property suites over a seeded corpus.
//!
//! Each suite evaluates one family of identities or inequalities on the
//! corpus of [`crate::lab::corpus`] and returns a [`SuiteReport`] with the
//! measured constants. Suites that bound a ratio by a constant run on the
//! half-width `W` and on `2W`, and require the constant to stay put.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::approx::{approx_error, approx_errors, approx_norms_from_errors, jackson_bernstein_ratio, truncation_is_best};
use crate::bessel::{bessel_convolve, bessel_factor, bessel_norm, embedding_check, HypersingularQuadrature};
use crate::error::{Error, Result};
use crate::io::{matrix_from_json, matrix_to_json};
use crate::lab::{
    corpus_models, decay_profile, generate, invert_finite_section, make_invertible, spectral_invariance_report,
    DecayKind, DecayModel, MIN_REPORT_HALF_WIDTH,
};
use crate::lattice::{LatticeIndex, LatticeMatrix, Window};
use crate::norms::{Exponent, MatrixNorm, NormSpec};
use crate::smoothness::{
    besov_norm_phi_lp, besov_norm_solid_lp, modulus, reiteration_ratio, AnyNorm, BesovMethod, BesovSpec,
    DyadicPartition, ModulusBesov,
};

/// Bound on identity residuals (entrywise, absolute).
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative tolerance for identities that hold up to round-off.
pub const EXACT_TOL: f64 = 1e-12;
/// Largest accepted equivalence constant `C` in `[1/C, C]`.
pub const MAX_CONSTANT: f64 = 20.0;
/// Largest accepted relative endpoint drift when `W` doubles.
pub const MAX_DRIFT: f64 = 0.1;
/// Sample size for the group parameter `t`.
pub const T_SAMPLES: usize = 32;
/// Bandwidths for the Bernstein and truncation suites.
pub const BANDWIDTHS: [usize; 3] = [4, 8, 16];
/// `(r, p)` pairs for the Besov equivalence suites.
pub const BESOV_PAIRS: [(f64, Exponent); 3] =
    [(0.5, Exponent::Infinite), (1.5, Exponent::Infinite), (1.0, Exponent::Finite(1.0))];
/// Grid refinement tolerance for the modulus.
pub const GRID_TOL: f64 = 0.01;
/// Decay-fit tolerance for the deterministic model at `W >= 128`.
pub const FIT_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub corpus_size: usize,
    pub half_width: usize,
    pub dim: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 20, corpus_size: 100, half_width: 64, dim: 1 }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.corpus_size == 0 {
            return Err(Error::InvalidParameter("corpus is empty (corpus size 0)".into()));
        }
        if self.half_width == 0 {
            return Err(Error::InvalidParameter("half-width must be positive".into()));
        }
        Window::new(self.dim, self.half_width).map(|_| ())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Leibniz,
    Quotient,
    GroupLaw,
    Binomial,
    Bernstein,
    Solidity,
    Isometry,
    SchurEmbedding,
    Submultiplicativity,
    LpEquivalence,
    BesovEmbeddings,
    BesovAlgebra,
    GridConvergence,
    TruncationOptimality,
    ApproxEquivalence,
    JacksonBernstein,
    Reiteration,
    BesselExactness,
    MultiplierSymmetry,
    Embedding,
    InverseClosedness,
    RoundTrip,
}

impl Suite {
    pub const ALL: [Suite; 22] = [
        Self::Leibniz,
        Self::Quotient,
        Self::GroupLaw,
        Self::Binomial,
        Self::Bernstein,
        Self::Solidity,
        Self::Isometry,
        Self::SchurEmbedding,
        Self::Submultiplicativity,
        Self::LpEquivalence,
        Self::BesovEmbeddings,
        Self::BesovAlgebra,
        Self::GridConvergence,
        Self::TruncationOptimality,
        Self::ApproxEquivalence,
        Self::JacksonBernstein,
        Self::Reiteration,
        Self::BesselExactness,
        Self::MultiplierSymmetry,
        Self::Embedding,
        Self::InverseClosedness,
        Self::RoundTrip,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Leibniz => "leibniz",
            Self::Quotient => "quotient",
            Self::GroupLaw => "group-law",
            Self::Binomial => "binomial",
            Self::Bernstein => "bernstein",
            Self::Solidity => "solidity",
            Self::Isometry => "isometry",
            Self::SchurEmbedding => "schur-embedding",
            Self::Submultiplicativity => "submultiplicativity",
            Self::LpEquivalence => "lp-equivalence",
            Self::BesovEmbeddings => "besov-embeddings",
            Self::BesovAlgebra => "besov-algebra",
            Self::GridConvergence => "grid-convergence",
            Self::TruncationOptimality => "truncation-optimality",
            Self::ApproxEquivalence => "approx-equivalence",
            Self::JacksonBernstein => "jackson-bernstein",
            Self::Reiteration => "reiteration",
            Self::BesselExactness => "bessel-exactness",
            Self::MultiplierSymmetry => "multiplier-symmetry",
            Self::Embedding => "embedding",
            Self::InverseClosedness => "inverse-closedness",
            Self::RoundTrip => "round-trip",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|x| x.name() == s.trim())
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub stats: BTreeMap<String, f64>,
    /// The first violating case, with enough context to regenerate it.
    pub failing_case: Option<Value>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        Self { suite, passed: true, stats: BTreeMap::new(), failing_case: None }
    }

    fn stat(&mut self, key: impl Into<String>, v: f64) {
        self.stats.insert(key.into(), v);
    }

    fn fail(&mut self, case: Value) {
        if self.passed {
            self.failing_case = Some(case);
        }
        self.passed = false;
    }

    /// Records `value` under `key` and fails unless `ok`.
    fn check(&mut self, key: &str, value: f64, ok: bool, case: impl FnOnce() -> Value) {
        self.stat(key, value);
        if !ok {
            let mut c = case();
            if let Value::Object(map) = &mut c {
                map.insert("check".into(), json!(key));
                map.insert("value".into(), json!(value));
            }
            self.fail(c);
        }
    }
}

/// Largest value with the index where it occurs; NaN counts as the worst value.
#[derive(Clone, Copy, Debug)]
struct Worst {
    value: f64,
    index: usize,
}

impl Worst {
    const NONE: Worst = Worst { value: f64::NEG_INFINITY, index: 0 };

    fn max(self, other: Worst) -> Worst {
        if !self.value.is_nan() && (other.value.is_nan() || other.value > self.value) {
            other
        } else {
            self
        }
    }

    fn of(values: impl IntoIterator<Item = (usize, f64)>) -> Worst {
        values.into_iter().fold(Self::NONE, |w, (i, v)| w.max(Worst { value: v, index: i }))
    }

    /// Fails for NaN as well.
    fn below(&self, bound: f64) -> bool {
        self.value <= bound
    }
}

/// Min and max of a list of ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_index: usize,
    pub hi_index: usize,
}

impl RatioInterval {
    pub fn of(values: &[f64]) -> Self {
        let mut iv = Self { lo: f64::INFINITY, hi: f64::NEG_INFINITY, lo_index: 0, hi_index: 0 };
        for (i, &v) in values.iter().enumerate() {
            if v.is_nan() {
                return Self { lo: f64::NAN, hi: f64::NAN, lo_index: i, hi_index: i };
            }
            if v < iv.lo {
                iv.lo = v;
                iv.lo_index = i;
            }
            if v > iv.hi {
                iv.hi = v;
                iv.hi_index = i;
            }
        }
        iv
    }

    /// Smallest `C` with the interval inside `[1/C, C]`.
    pub fn constant(&self) -> f64 {
        self.hi.max(1.0 / self.lo)
    }

    /// Relative change of both endpoints from `self` to `other`.
    pub fn drift(&self, other: &Self) -> f64 {
        ((other.lo - self.lo) / self.lo).abs().max(((other.hi - self.hi) / self.hi).abs())
    }
}

/// How an interval suite judges the ratios it collects.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Bound {
    /// Ratio in `[1/C, C]`, endpoints stable.
    TwoSided,
    /// Ratio `<= C`, upper endpoint not growing.
    Upper,
}

/// The seeded corpus at any half-width, with generated matrices cached.
pub struct Corpus {
    cfg: VerifyConfig,
    models: Vec<DecayModel>,
    cache: Mutex<HashMap<usize, Arc<Vec<LatticeMatrix>>>>,
}

impl Corpus {
    pub fn new(cfg: VerifyConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, models: corpus_models(cfg.seed, cfg.corpus_size), cache: Mutex::new(HashMap::new()) })
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.cfg
    }

    pub fn models(&self) -> &[DecayModel] {
        &self.models
    }

    pub fn at(&self, half: usize) -> Result<Arc<Vec<LatticeMatrix>>> {
        if let Some(m) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&half) {
            return Ok(m.clone());
        }
        let mats: Vec<LatticeMatrix> =
            self.models.par_iter().map(|m| generate(m, self.cfg.dim, half)).collect::<Result<_>>()?;
        let mats = Arc::new(mats);
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).insert(half, mats.clone());
        Ok(mats)
    }

    /// Replay record for corpus matrix `i` on `[-W, W]^d`.
    pub fn case(&self, i: usize, half: usize) -> Value {
        json!({ "seed": self.cfg.seed, "index": i, "model": self.models[i], "dim": self.cfg.dim, "W": half })
    }

    /// Group parameters `t`, uniform in `[-1/2, 1/2)^d`.
    pub fn t_samples(&self, n: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x7457_5f73_616d_706c);
        (0..n).map(|_| (0..self.cfg.dim).map(|_| rng.random::<f64>() - 0.5).collect()).collect()
    }

    fn rng(&self, stream: u64, i: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(i as u64));
        rng.set_stream(stream);
        rng
    }

    fn halves(&self) -> [usize; 2] {
        [self.cfg.half_width, 2 * self.cfg.half_width]
    }
}

fn parse_specs(specs: &[&str]) -> Vec<AnyNorm> {
    specs.iter().map(|s| s.parse().expect("built-in spec parses")).collect()
}

/// Solid norms exercised by the solidity, isometry and Bernstein suites.
pub fn solid_specs() -> Vec<AnyNorm> {
    parse_specs(&[
        "jaffard:r=0",
        "jaffard:r=2",
        "schur:p=1,r=0",
        "schur:p=2,r=1",
        "schur:p=inf,r=0.5",
        "cpr:p=1,r=0",
        "cpr:p=2,r=1",
        "cpr:p=inf,r=2",
        "w[bessel:r=1]jaffard:r=0",
        "besov:base=jaffard:r=0,r=0.5,p=inf,method=modulus",
        "besov:base=jaffard:r=0,r=1,p=1,method=solidlp",
        "besov:base=[schur:p=1,r=0],r=1.5,p=2,method=philp",
    ])
}

/// Norms with an algebra property, for the submultiplicativity suite.
pub fn algebra_specs() -> Vec<AnyNorm> {
    parse_specs(&[
        "op",
        "schur:p=1,r=0",
        "schur:p=1,r=1",
        "jaffard:r=2",
        "cpr:p=1,r=0",
        "cpr:p=1,r=1",
        "cpr:p=2,r=1",
    ])
}

fn fmt_pair(r: f64, p: Exponent) -> String {
    format!("r={r},p={p}")
}

/// Runs one suite.
pub fn run_suite(corpus: &Corpus, suite: Suite) -> Result<SuiteReport> {
    match suite {
        Suite::Leibniz => leibniz(corpus),
        Suite::Quotient => quotient(corpus),
        Suite::GroupLaw => group_law(corpus),
        Suite::Binomial => binomial(corpus),
        Suite::Bernstein => bernstein(corpus),
        Suite::Solidity => solidity(corpus),
        Suite::Isometry => isometry(corpus),
        Suite::SchurEmbedding => schur_embedding(corpus),
        Suite::Submultiplicativity => submultiplicativity(corpus),
        Suite::LpEquivalence => lp_equivalence(corpus),
        Suite::BesovEmbeddings => besov_embeddings(corpus),
        Suite::BesovAlgebra => besov_algebra(corpus),
        Suite::GridConvergence => grid_convergence(corpus),
        Suite::TruncationOptimality => truncation_optimality(corpus),
        Suite::ApproxEquivalence => approx_equivalence(corpus),
        Suite::JacksonBernstein => jackson_bernstein(corpus),
        Suite::Reiteration => reiteration(corpus),
        Suite::BesselExactness => bessel_exactness(corpus),
        Suite::MultiplierSymmetry => multiplier_symmetry(corpus),
        Suite::Embedding => embedding(corpus),
        Suite::InverseClosedness => inverse_closedness(corpus),
        Suite::RoundTrip => round_trip(corpus),
    }
}

/// Runs suites in order, sharing the corpus.
pub fn run_suites(cfg: VerifyConfig, suites: &[Suite]) -> Result<Vec<SuiteReport>> {
    let corpus = Corpus::new(cfg)?;
    suites.iter().map(|s| run_suite(&corpus, *s)).collect()
}

/// Collects `f(A_i)` for every corpus matrix at both half-widths and judges
/// the resulting ratio intervals under `label`.
fn interval_check(
    corpus: &Corpus,
    report: &mut SuiteReport,
    bound: Bound,
    ratios: &[(String, [Vec<f64>; 2])],
) {
    let halves = corpus.halves();
    for (label, per_w) in ratios {
        let ivs = [RatioInterval::of(&per_w[0]), RatioInterval::of(&per_w[1])];
        for (iv, w) in ivs.iter().zip(halves) {
            report.stat(format!("{label}:lo@W{w}"), iv.lo);
            report.stat(format!("{label}:hi@W{w}"), iv.hi);
        }
        let (value, drift) = match bound {
            Bound::TwoSided => (ivs[0].constant().max(ivs[1].constant()), ivs[0].drift(&ivs[1])),
            Bound::Upper => (ivs[0].hi.max(ivs[1].hi), ((ivs[1].hi - ivs[0].hi) / ivs[0].hi).max(0.0)),
        };
        // the extreme case at 2W is the one to replay
        let worst = if bound == Bound::Upper || ivs[1].hi >= 1.0 / ivs[1].lo { ivs[1].hi_index } else { ivs[1].lo_index };
        report.check(&format!("{label}:C"), value, value <= MAX_CONSTANT, || corpus.case(worst, halves[1]));
        report.check(&format!("{label}:drift"), drift, drift < MAX_DRIFT, || corpus.case(worst, halves[1]));
    }
}

/// `f` over the corpus at `W` and `2W`.
fn both_widths<T: Send>(
    corpus: &Corpus,
    f: impl Fn(usize, &LatticeMatrix) -> Result<T> + Sync,
) -> Result<[Vec<T>; 2]> {
    let [w1, w2] = corpus.halves();
    let run = |w: usize| -> Result<Vec<T>> {
        let mats = corpus.at(w)?;
        mats.par_iter().enumerate().map(|(i, a)| f(i, a)).collect()
    };
    Ok([run(w1)?, run(w2)?])
}

fn leibniz(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Leibniz);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let ts = corpus.t_samples(T_SAMPLES);
    let n = mats.len();
    let per: Vec<(usize, f64)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<(usize, f64)> {
            let (a, b) = (&mats[i], &mats[(i + 1) % n]);
            let ab = a.multiply(b)?;
            let mut worst = 0.0f64;
            for t in &ts {
                let lhs = ab.difference(t, 1);
                let rhs = a.modulate(t).multiply(&b.difference(t, 1))?.add(&a.difference(t, 1).multiply(b)?)?;
                worst = worst.max(lhs.max_abs_diff(&rhs)?);
            }
            Ok((i, worst))
        })
        .collect::<Result<_>>()?;
    let worst = Worst::of(per);
    report.check("max_residual", worst.value, worst.below(RESIDUAL_TOL), || {
        json!({ "pair": [corpus.case(worst.index, w), corpus.case((worst.index + 1) % n, w)] })
    });
    report.stat("t_samples", ts.len() as f64);
    Ok(report)
}

fn quotient(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Quotient);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let ts = corpus.t_samples(T_SAMPLES);
    let per: Vec<(usize, f64)> = mats
        .par_iter()
        .enumerate()
        .map(|(i, a)| -> Result<(usize, f64)> {
            let b = make_invertible(a, 2.0)?;
            let inv = invert_finite_section(&b)?;
            let mut worst = 0.0f64;
            for t in &ts {
                // Delta(B^-1) + chi(B^-1) Delta(B) B^-1 vanishes
                let lhs = inv.difference(t, 1);
                let rhs = inv.modulate(t).multiply(&b.difference(t, 1))?.multiply(&inv)?;
                worst = worst.max(lhs.add(&rhs)?.max_abs());
            }
            Ok((i, worst))
        })
        .collect::<Result<_>>()?;
    let worst = Worst::of(per);
    report.check("max_residual", worst.value, worst.below(RESIDUAL_TOL), || {
        let mut c = corpus.case(worst.index, w);
        c["lambda"] = json!(2.0);
        c
    });
    Ok(report)
}

fn group_law(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::GroupLaw);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let ts = corpus.t_samples(T_SAMPLES);
    let per: Vec<(usize, f64)> = mats
        .par_iter()
        .enumerate()
        .map(|(i, a)| -> Result<(usize, f64)> {
            let mut worst = 0.0f64;
            for (s, t) in ts.iter().zip(ts.iter().cycle().skip(1)) {
                let st: Vec<f64> = s.iter().zip(t).map(|(x, y)| x + y).collect();
                let diff = a.modulate(s).modulate(t).max_abs_diff(&a.modulate(&st))?;
                worst = worst.max(diff / a.max_abs());
            }
            Ok((i, worst))
        })
        .collect::<Result<_>>()?;
    let worst = Worst::of(per);
    report.check("max_relative_residual", worst.value, worst.below(EXACT_TOL), || corpus.case(worst.index, w));
    Ok(report)
}

fn binomial(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Binomial);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let ts = corpus.t_samples(8);
    let per: Vec<(usize, f64)> = mats
        .par_iter()
        .enumerate()
        .map(|(i, a)| -> Result<(usize, f64)> {
            let mut worst = 0.0f64;
            for t in &ts {
                for k in 1..=4u32 {
                    let mut sum = LatticeMatrix::zeros(a.dim(), a.half_width())?;
                    let mut c = 1.0;
                    for j in 0..=k {
                        let jt: Vec<f64> = t.iter().map(|x| j as f64 * x).collect();
                        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                        sum = sum.add(&a.modulate(&jt).scale(Complex64::new(sign * c, 0.0)))?;
                        c = c * (k - j) as f64 / (j + 1) as f64;
                    }
                    let diff = a.difference(t, k).max_abs_diff(&sum)?;
                    worst = worst.max(diff / (a.max_abs() * 2f64.powi(k as i32)));
                }
            }
            Ok((i, worst))
        })
        .collect::<Result<_>>()?;
    let worst = Worst::of(per);
    report.check("max_relative_residual", worst.value, worst.below(EXACT_TOL), || corpus.case(worst.index, w));
    Ok(report)
}

fn bernstein(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Bernstein);
    let w = corpus.cfg.half_width;
    let dim = corpus.cfg.dim;
    let mats = corpus.at(w)?;
    for spec in solid_specs() {
        for n in BANDWIDTHS {
            let per: Vec<(usize, f64)> = mats
                .par_iter()
                .enumerate()
                .map(|(i, a)| {
                    let tn = a.band_truncate(n);
                    let denom = spec.norm(&tn);
                    let worst = (0..dim)
                        .map(|axis| {
                            let mut alpha = vec![0u32; dim];
                            alpha[axis] = 1;
                            spec.norm(&tn.derivation(&alpha)) / denom
                        })
                        .fold(0.0, f64::max);
                    (i, worst / (2.0 * PI * n as f64))
                })
                .collect();
            let worst = Worst::of(per);
            report.check(&format!("{spec}:N={n}:ratio/2piN"), worst.value, worst.below(1.0 + EXACT_TOL), || {
                let mut c = corpus.case(worst.index, w);
                c["norm"] = json!(spec.to_string());
                c["N"] = json!(n);
                c
            });
        }
    }
    Ok(report)
}

/// Unit phase in `{1, i, -1, -i}`.
fn quarter_turn(rng: &mut ChaCha8Rng) -> Complex64 {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]
        [rng.random_range(0..4)]
}

/// `(A', B)` with `|A'| <= |A| <= |B|` entrywise.
fn dominated_pair(a: &LatticeMatrix, rng: &mut ChaCha8Rng) -> Result<(LatticeMatrix, LatticeMatrix)> {
    let mut small = Vec::new();
    let mut big = Vec::new();
    for (m, d) in a.diagonals() {
        let mut s = Vec::with_capacity(d.entries().len());
        let mut b = Vec::with_capacity(d.entries().len());
        for z in d.entries() {
            let keep = if rng.random_bool(0.25) { 0.0 } else { rng.random::<f64>() };
            s.push(Complex64::from_polar(z.norm() * keep, 2.0 * PI * rng.random::<f64>()));
            b.push(z * (1.0 + rng.random_range(1e-6..1.0)) * quarter_turn(rng));
        }
        small.push((*m, s));
        big.push((*m, b));
    }
    Ok((
        LatticeMatrix::from_diagonals(a.dim(), a.half_width(), small)?,
        LatticeMatrix::from_diagonals(a.dim(), a.half_width(), big)?,
    ))
}

fn solidity(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Solidity);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let specs = solid_specs();
    let pairs: Vec<(LatticeMatrix, LatticeMatrix)> = mats
        .par_iter()
        .enumerate()
        .map(|(i, a)| dominated_pair(a, &mut corpus.rng(1, i)))
        .collect::<Result<_>>()?;
    for spec in &specs {
        let per: Vec<(usize, f64, f64)> = mats
            .par_iter()
            .zip(&pairs)
            .enumerate()
            .map(|(i, (a, (small, big)))| {
                let excess = spec.norm(small) - spec.norm(big);
                let na = spec.norm(a);
                (i, excess, (spec.norm(&a.abs()) - na).abs() / na)
            })
            .collect();
        let excess = Worst::of(per.iter().map(|x| (x.0, x.1)));
        report.check(&format!("{spec}:max(|A'|-|B|)"), excess.value, excess.value <= 0.0, || {
            let mut c = corpus.case(excess.index, w);
            c["norm"] = json!(spec.to_string());
            c["pair_stream"] = json!(1);
            c
        });
        let abs = Worst::of(per.iter().map(|x| (x.0, x.2)));
        report.check(&format!("{spec}:abs_invariance"), abs.value, abs.below(EXACT_TOL), || {
            let mut c = corpus.case(abs.index, w);
            c["norm"] = json!(spec.to_string());
            c
        });
    }
    Ok(report)
}

fn isometry(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Isometry);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let ts = corpus.t_samples(T_SAMPLES);
    for spec in solid_specs() {
        let per: Vec<(usize, f64)> = mats
            .par_iter()
            .enumerate()
            .map(|(i, a)| {
                let na = spec.norm(a);
                let worst = ts.iter().map(|t| (spec.norm(&a.modulate(t)) - na).abs() / na).fold(0.0, f64::max);
                (i, worst)
            })
            .collect();
        let worst = Worst::of(per);
        report.check(&format!("{spec}:max_relative_change"), worst.value, worst.below(EXACT_TOL), || {
            let mut c = corpus.case(worst.index, w);
            c["norm"] = json!(spec.to_string());
            c
        });
    }
    Ok(report)
}

fn schur_embedding(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::SchurEmbedding);
    let params = [(Exponent::Finite(1.0), 0.0), (Exponent::Finite(2.0), 1.0), (Exponent::Infinite, 0.5)];
    let ratios = params
        .iter()
        .map(|&(p, r)| {
            let v = both_widths(corpus, |_, a| Ok(NormSpec::schur(p, r).norm(a) / NormSpec::cpr(p, r).norm(a)))?;
            Ok((format!("schur/cpr:p={p},r={r}"), v))
        })
        .collect::<Result<Vec<_>>>()?;
    interval_check(corpus, &mut report, Bound::Upper, &ratios);
    Ok(report)
}

fn submultiplicativity(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Submultiplicativity);
    let specs = algebra_specs();
    let products = both_widths(corpus, |i, a| {
        let mats = corpus.at(a.half_width())?;
        let b = &mats[(i + 1) % mats.len()];
        Ok((a.multiply(b)?, b.clone()))
    })?;
    let mut ratios = Vec::new();
    for spec in &specs {
        let per_w: [Vec<f64>; 2] = [0, 1].map(|k| {
            let half = corpus.halves()[k];
            let mats = corpus.at(half).expect("cached corpus");
            products[k]
                .par_iter()
                .zip(mats.par_iter())
                .map(|((ab, b), a)| spec.norm(ab) / (spec.norm(a) * spec.norm(b)))
                .collect()
        });
        if spec.to_string() == "schur:p=1,r=0" || spec.to_string() == "op" {
            let worst = Worst::of(per_w.iter().flatten().copied().enumerate());
            report.check(&format!("{spec}:max_ratio<=1"), worst.value, worst.below(1.0 + EXACT_TOL), || {
                let n = per_w[0].len();
                let mut c = corpus.case(worst.index % n, corpus.halves()[worst.index / n]);
                c["norm"] = json!(spec.to_string());
                c
            });
        }
        ratios.push((format!("{spec}:|AB|/(|A||B|)"), per_w));
    }
    interval_check(corpus, &mut report, Bound::Upper, &ratios);
    Ok(report)
}

fn lp_equivalence(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::LpEquivalence);
    let base = NormSpec::jaffard(0.0);
    for (r, p) in BESOV_PAIRS {
        let modulus = BesovSpec::new(base.clone(), r, p, BesovMethod::ModulusDyadic { levels: None, grid: None })?;
        let triples = both_widths(corpus, |_, a| {
            let part = DyadicPartition::for_window(a.half_width());
            Ok([modulus.norm(a), besov_norm_solid_lp(a, &base, r, p)?, besov_norm_phi_lp(a, &base, r, p, &part)])
        })?;
        let pick = |x: usize, y: usize| -> [Vec<f64>; 2] {
            [0, 1].map(|k| triples[k].iter().map(|t| t[x] / t[y]).collect())
        };
        let pairs = [("modulus/solidlp", pick(0, 1)), ("modulus/philp", pick(0, 2)), ("solidlp/philp", pick(1, 2))];
        let tag = fmt_pair(r, p);
        // a single interval for all three pairings
        let all: Vec<f64> = pairs.iter().flat_map(|(_, v)| v.iter().flatten().copied()).collect();
        let iv = RatioInterval::of(&all);
        let n = corpus.cfg.corpus_size;
        let worst_flat = if iv.hi >= 1.0 / iv.lo { iv.hi_index } else { iv.lo_index };
        let (k, i) = ((worst_flat / n) % 2, worst_flat % n);
        report.check(&format!("{tag}:C"), iv.constant(), iv.constant() <= MAX_CONSTANT, || {
            corpus.case(i, corpus.halves()[k])
        });
        let labelled: Vec<(String, [Vec<f64>; 2])> =
            pairs.into_iter().map(|(name, v)| (format!("{tag}:{name}"), v)).collect();
        interval_check(corpus, &mut report, Bound::TwoSided, &labelled);
    }
    Ok(report)
}

fn besov_embeddings(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::BesovEmbeddings);
    let base = NormSpec::jaffard(0.0);
    let mut ratios = Vec::new();
    let inf = Exponent::Infinite;
    for p in [Exponent::Finite(1.0), inf] {
        let v = both_widths(corpus, |_, a| {
            Ok(besov_norm_solid_lp(a, &base, 0.5, p)? / besov_norm_solid_lp(a, &base, 1.5, p)?)
        })?;
        ratios.push((format!("r=0.5/r=1.5:p={p}"), v));
    }
    for (p, q) in [(Exponent::Finite(1.0), Exponent::Finite(2.0)), (Exponent::Finite(2.0), inf), (Exponent::Finite(1.0), inf)] {
        let v = both_widths(corpus, |_, a| {
            Ok(besov_norm_solid_lp(a, &base, 1.0, q)? / besov_norm_solid_lp(a, &base, 1.0, p)?)
        })?;
        ratios.push((format!("p={q}/p={p}:r=1"), v));
    }
    interval_check(corpus, &mut report, Bound::Upper, &ratios);
    let mut orders = Vec::new();
    for r in [0.5f64, 1.5] {
        let k = r.floor() as u32 + 1;
        let v = both_widths(corpus, |_, a| {
            let lo = ModulusBesov::new(&base, r, inf).with_order(k);
            let hi = ModulusBesov::new(&base, r, inf).with_order(k + 1);
            Ok(lo.norm(a) / hi.norm(a))
        })?;
        orders.push((format!("k={k}/k={}:r={r},p=inf", k + 1), v));
    }
    interval_check(corpus, &mut report, Bound::TwoSided, &orders);
    Ok(report)
}

fn besov_algebra(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::BesovAlgebra);
    let specs: Vec<BesovSpec> = [
        "besov:base=jaffard:r=2,r=0.5,p=inf,method=modulus",
        "besov:base=[cpr:p=1,r=0],r=1,p=1,method=solidlp",
        "besov:base=[cpr:p=1,r=0],r=0.5,p=inf,method=solidlp",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<Result<_>>()?;
    let mut ratios = Vec::new();
    for spec in &specs {
        let v = both_widths(corpus, |i, a| {
            let mats = corpus.at(a.half_width())?;
            let b = &mats[(i + 1) % mats.len()];
            Ok(spec.norm(&a.multiply(b)?) / (spec.norm(a) * spec.norm(b)))
        })?;
        ratios.push((format!("{spec}:|AB|/(|A||B|)"), v));
    }
    interval_check(corpus, &mut report, Bound::Upper, &ratios);
    Ok(report)
}

fn grid_convergence(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::GridConvergence);
    let w = corpus.cfg.half_width;
    let g = crate::smoothness::default_grid(corpus.cfg.dim);
    let mats = corpus.at(w)?;
    let base = NormSpec::jaffard(0.0);
    let per: Vec<(usize, f64)> = mats
        .par_iter()
        .enumerate()
        .map(|(i, a)| -> Result<(usize, f64)> {
            let mut worst = 0.0f64;
            for order in [1, 2] {
                for h in [0.5, 0.125, 1.0 / 32.0] {
                    let coarse = modulus(a, &base, order, h, g)?;
                    let fine = modulus(a, &base, order, h, 2 * g)?;
                    if fine > 0.0 {
                        worst = worst.max((fine - coarse).abs() / fine);
                    }
                }
            }
            Ok((i, worst))
        })
        .collect::<Result<_>>()?;
    let worst = Worst::of(per);
    report.stat("grid", g as f64);
    report.check("max_relative_change", worst.value, worst.below(GRID_TOL), || corpus.case(worst.index, w));
    Ok(report)
}

fn truncation_optimality(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::TruncationOptimality);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let bases: Vec<NormSpec> = ["jaffard:r=1", "cpr:p=1,r=0", "cpr:p=2,r=1", "w[bessel:r=1]cpr:p=inf,r=0"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    for base in &bases {
        debug_assert!(truncation_is_best(base));
        let per: Vec<(usize, f64, f64)> = mats
            .par_iter()
            .enumerate()
            .map(|(i, a)| -> Result<(usize, f64, f64)> {
                let mut rng = corpus.rng(2, i);
                let mut excess = f64::NEG_INFINITY;
                for n in BANDWIDTHS {
                    let tn = a.band_truncate(n);
                    let best = base.norm(&a.sub(&tn)?);
                    for _ in 0..4 {
                        let scale = rng.random_range(1e-3..1.0);
                        let t = tn.add(&perturb(&tn.map_entries(|z| z * scale), &mut rng)?)?;
                        excess = excess.max(best - base.norm(&a.sub(&t)?));
                    }
                }
                let errors = approx_errors(a, base);
                let rise = errors.windows(2).map(|e| e[1] - e[0]).fold(f64::NEG_INFINITY, f64::max);
                let beyond = approx_error(a, a.bandwidth(), base);
                Ok((i, excess, rise.max(beyond)))
            })
            .collect::<Result<_>>()?;
        let excess = Worst::of(per.iter().map(|x| (x.0, x.1)));
        report.check(&format!("{base}:max(E_N-|A-T|)"), excess.value, excess.value <= 0.0, || {
            let mut c = corpus.case(excess.index, w);
            c["norm"] = json!(base.to_string());
            c
        });
        let mono = Worst::of(per.iter().map(|x| (x.0, x.2)));
        report.check(&format!("{base}:E_N_monotone"), mono.value, mono.value <= 0.0, || {
            let mut c = corpus.case(mono.index, w);
            c["norm"] = json!(base.to_string());
            c
        });
    }
    // X_N . X_M inside X_{N+M-1}
    let mut overflow = 0usize;
    let mut first = None;
    for i in 0..mats.len() {
        let b = &mats[(i + 1) % mats.len()];
        for (n, m) in [(2, 3), (4, 4), (5, 9)] {
            let p = mats[i].band_truncate(n).multiply(&b.band_truncate(m))?;
            if p.bandwidth() > n + m - 1 {
                overflow += 1;
                first.get_or_insert((i, n, m));
            }
        }
    }
    report.check("scheme_product_overflow", overflow as f64, overflow == 0, || {
        let (i, n, m) = first.expect("overflow recorded");
        let mut c = corpus.case(i, w);
        c["N"] = json!(n);
        c["M"] = json!(m);
        c
    });
    Ok(report)
}

/// Random entries with `|x| <= |a|` and uniform phases on the support of `a`.
fn perturb(a: &LatticeMatrix, rng: &mut ChaCha8Rng) -> Result<LatticeMatrix> {
    let diags: Vec<(LatticeIndex, Vec<Complex64>)> = a
        .diagonals()
        .map(|(m, d)| {
            let e = d
                .entries()
                .iter()
                .map(|z| Complex64::from_polar(z.norm() * rng.random::<f64>(), 2.0 * PI * rng.random::<f64>()))
                .collect();
            (*m, e)
        })
        .collect();
    LatticeMatrix::from_diagonals(a.dim(), a.half_width(), diags)
}

fn approx_equivalence(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::ApproxEquivalence);
    let base = NormSpec::jaffard(0.0);
    let mut ratios = Vec::new();
    for (r, p) in BESOV_PAIRS {
        let v = both_widths(corpus, |_, a| {
            let n = approx_norms_from_errors(&approx_errors(a, &base), r, p);
            Ok(n.dyadic / n.integral_sum)
        })?;
        ratios.push((format!("{}:dyadic/integral-sum", fmt_pair(r, p)), v));
    }
    interval_check(corpus, &mut report, Bound::TwoSided, &ratios);
    Ok(report)
}

fn jackson_bernstein(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::JacksonBernstein);
    let base = NormSpec::jaffard(0.0);
    let mut ratios = Vec::new();
    for (r, p) in BESOV_PAIRS {
        let v = both_widths(corpus, |_, a| jackson_bernstein_ratio(a, &base, r, p))?;
        ratios.push((format!("{}:approx/besov", fmt_pair(r, p)), v));
    }
    interval_check(corpus, &mut report, Bound::TwoSided, &ratios);
    Ok(report)
}

fn reiteration(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Reiteration);
    let base = NormSpec::jaffard(0.0);
    let v = both_widths(corpus, |_, a| reiteration_ratio(a, &base, 0.5, 0.5, Exponent::Infinite))?;
    interval_check(corpus, &mut report, Bound::TwoSided, &[("r=s=0.5,p=q=inf:iterated/direct".to_string(), v)]);
    Ok(report)
}

/// Orders used for the Bessel potential suites.
pub const BESSEL_ORDERS: [f64; 3] = [0.5, 1.0, 1.9];

fn bessel_exactness(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::BesselExactness);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let bases: Vec<NormSpec> = ["jaffard:r=0", "jaffard:r=2", "schur:p=1,r=0", "cpr:p=2,r=1", "cpr:p=1,r=0"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    for r in BESSEL_ORDERS {
        let per: Vec<(usize, f64, f64)> = mats
            .par_iter()
            .enumerate()
            .map(|(i, a)| -> Result<(usize, f64, f64)> {
                let g = bessel_convolve(a, r)?;
                let mut worst = 0.0f64;
                for base in &bases {
                    let n = base.norm(a);
                    worst = worst.max((bessel_norm(&g, r, base)? - n).abs() / n);
                }
                // entrywise: weighting undoes the convolution
                let back = g.map_diagonals(|m| Complex64::new(1.0 / bessel_factor(m, r), 0.0));
                let entry = a
                    .diagonals()
                    .map(|(m, d)| {
                        let e = back.diagonal(m).map(|x| x.entries()).unwrap_or(&[]);
                        d.entries()
                            .iter()
                            .zip(e)
                            .filter(|(z, _)| z.norm() > 0.0)
                            .map(|(z, y)| (z - y).norm() / z.norm())
                            .fold(0.0, f64::max)
                    })
                    .fold(0.0, f64::max);
                Ok((i, worst, entry))
            })
            .collect::<Result<_>>()?;
        let worst = Worst::of(per.iter().map(|x| (x.0, x.1)));
        report.check(&format!("r={r}:max_relative_error"), worst.value, worst.below(EXACT_TOL), || {
            let mut c = corpus.case(worst.index, w);
            c["r"] = json!(r);
            c
        });
        let entry = Worst::of(per.iter().map(|x| (x.0, x.2)));
        report.check(&format!("r={r}:max_entry_error"), entry.value, entry.below(1e-13), || {
            let mut c = corpus.case(entry.index, w);
            c["r"] = json!(r);
            c
        });
    }
    let window = Window::new(corpus.cfg.dim, w)?;
    let mut semigroup = 0.0f64;
    for m in window.all_offsets() {
        for r in BESSEL_ORDERS {
            for s in BESSEL_ORDERS {
                let prod = bessel_factor(&m, r) * bessel_factor(&m, s);
                let direct = bessel_factor(&m, r + s);
                semigroup = semigroup.max((prod - direct).abs() / direct);
            }
        }
    }
    report.check("semigroup_max_relative_error", semigroup, semigroup <= EXACT_TOL, || {
        json!({ "dim": corpus.cfg.dim, "W": w, "orders": BESSEL_ORDERS })
    });
    Ok(report)
}

fn multiplier_symmetry(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::MultiplierSymmetry);
    let w = corpus.cfg.half_width;
    let dim = corpus.cfg.dim;
    let quad = HypersingularQuadrature::new(dim, 0.5)?;
    let levels = quad.levels();
    let zero = quad.multipliers(&LatticeIndex::zero(dim), levels)?;
    let z = zero.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    report.check("|mu(0)|", z, z == 0.0, || json!({ "dim": dim, "r": 0.5 }));
    let window = Window::new(dim, w.min(16))?;
    let mut asym = 0.0f64;
    let mut positive = f64::NEG_INFINITY;
    let mut rise = f64::NEG_INFINITY;
    for m in window.all_offsets() {
        let a = quad.multipliers(&m, levels)?;
        let b = quad.multipliers(&m.neg(), levels)?;
        for (x, y) in a.iter().zip(&b) {
            asym = asym.max((x - y).abs());
        }
        positive = positive.max(a.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        // |mu_eps| grows as eps shrinks
        rise = rise.max(a.windows(2).map(|v| v[1] - v[0]).fold(f64::NEG_INFINITY, f64::max));
    }
    report.check("max|mu(m)-conj(mu(-m))|", asym, asym == 0.0, || json!({ "dim": dim, "W": w.min(16) }));
    report.check("max_mu", positive, positive <= 0.0, || json!({ "dim": dim, "W": w.min(16) }));
    report.check("max_mu_increase", rise, rise <= 0.0, || json!({ "dim": dim, "W": w.min(16) }));
    Ok(report)
}

fn embedding(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Embedding);
    let r = 0.5;
    let base = NormSpec::jaffard(0.0);
    let quad = HypersingularQuadrature::new(corpus.cfg.dim, r)?;
    let reports = both_widths(corpus, |_, a| embedding_check(a, r, &base, Some(&quad)))?;
    let pick = |f: &dyn Fn(&crate::bessel::EmbeddingReport) -> f64| -> [Vec<f64>; 2] {
        [0, 1].map(|k| reports[k].iter().map(f).collect())
    };
    interval_check(
        corpus,
        &mut report,
        Bound::Upper,
        &[
            ("bessel/besov_1".to_string(), pick(&|e| e.lower_ratio)),
            ("besov_inf/bessel".to_string(), pick(&|e| e.upper_ratio)),
        ],
    );
    interval_check(
        corpus,
        &mut report,
        Bound::TwoSided,
        &[("hypersingular/bessel".to_string(), pick(&|e| e.hypersingular_ratio.unwrap_or(f64::NAN)))],
    );
    Ok(report)
}

fn inverse_closedness(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::InverseClosedness);
    let w = corpus.cfg.half_width.max(MIN_REPORT_HALF_WIDTH);
    let halves = [w, 2 * w];
    let norms = parse_specs(&[
        "jaffard:r=2",
        "cpr:p=1,r=1",
        "w[bessel:r=1]jaffard:r=0",
        "besov:base=jaffard:r=0,r=1,p=inf,method=solidlp",
    ]);
    let reports: Vec<_> = corpus
        .models()
        .par_iter()
        .map(|m| spectral_invariance_report(m, corpus.cfg.dim, &halves, 2.0, &norms))
        .collect::<Result<_>>()?;
    let change = Worst::of(reports.iter().enumerate().flat_map(|(i, r)| r.stability.iter().map(move |s| (i, s.relative_change))));
    report.check("max_relative_change(|B^-1|)", change.value, change.below(MAX_DRIFT), || {
        let mut c = corpus.case(change.index, halves[1]);
        c["W_sequence"] = json!(halves);
        c
    });
    let settled = reports.iter().flat_map(|r| &r.stability).filter(|s| s.settling).count();
    report.stat("settling_fraction", settled as f64 / (reports.len() * norms.len()) as f64);
    let fit = Worst::of(reports.iter().enumerate().flat_map(|(i, r)| {
        r.cells
            .iter()
            .filter(|c| c.half_width >= 128 && r.model.kind == DecayKind::DeterministicEnvelope)
            .map(move |c| (i, (c.profile_b.exponent - r.model.r).abs()))
    }));
    if fit.value.is_finite() {
        report.check("det:max|exponent(B)-r|", fit.value, fit.below(FIT_TOL), || corpus.case(fit.index, halves[1]));
    }
    let gap = Worst::of(reports.iter().enumerate().flat_map(|(i, r)| {
        r.cells.iter().map(move |c| (i, r.model.r - c.profile_b_inv.exponent))
    }));
    report.stat("max(r-exponent(B^-1))", gap.value);
    Ok(report)
}

fn round_trip(corpus: &Corpus) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::RoundTrip);
    let w = corpus.cfg.half_width;
    let mats = corpus.at(w)?;
    let mut json_failures = 0usize;
    let mut first = None;
    for (i, a) in mats.iter().enumerate() {
        let back = matrix_from_json(&matrix_to_json(a)?)?;
        if &back != a {
            json_failures += 1;
            first.get_or_insert(i);
        }
        let (b, c) = (decay_profile(a, None).ok(), decay_profile(&back, None).ok());
        if b != c {
            json_failures += 1;
            first.get_or_insert(i);
        }
    }
    report.check("json_mismatches", json_failures as f64, json_failures == 0, || {
        corpus.case(first.unwrap_or(0), w)
    });
    let mut grammar_failures = Vec::new();
    let specs = solid_specs().into_iter().chain(algebra_specs()).chain(parse_specs(&[
        "cpr:p=inf,r=1,literal=true",
        "w[poly:r=1.5]schur:p=1,r=0",
        "besov:base=op,r=0.7,p=3,k=2,method=modulus,lmin=1,lmax=9,grid=16",
    ]));
    for spec in specs {
        let printed = spec.to_string();
        match printed.parse::<AnyNorm>() {
            Ok(back) if back == spec && back.to_string() == printed => {}
            _ => grammar_failures.push(printed),
        }
    }
    report.check("grammar_mismatches", grammar_failures.len() as f64, grammar_failures.is_empty(), || {
        json!({ "specs": grammar_failures })
    });
    Ok(report)
}
