//! Base algebra norms and their weighted variants.
//!
//! Every norm here implements [`MatrixNorm`], whose central method evaluates
//! the norm of `A` after scaling each side diagonal `m` by a multiplier
//! `mu(m)`. Differences, derivations, Bessel potentials and dyadic block
//! filters are all such multipliers, so the smoothness code never has to
//! materialise intermediate matrices for solid norms.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense;
use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, LatticeMatrix};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Summability exponent `p` in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Self::Infinite)
        } else if p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!("exponent p = {p} must lie in [1, inf]")))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(&self) -> f64 {
        match self {
            Self::Finite(p) => 1.0 / p,
            Self::Infinite => 0.0,
        }
    }

    pub fn sum(&self) -> LpSum {
        LpSum { p: *self, acc: 0.0 }
    }

    /// `l^p` norm of a sequence of nonnegative terms.
    pub fn norm_of(&self, terms: impl IntoIterator<Item = f64>) -> f64 {
        let mut s = self.sum();
        terms.into_iter().for_each(|x| s.push(x));
        s.finish()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinite),
            t => Self::new(parse_f64(t, "p")?),
        }
    }
}

/// Accumulates an `l^p` sum; for `p = inf` the sum degenerates to a running max.
#[derive(Clone, Copy, Debug)]
pub struct LpSum {
    p: Exponent,
    acc: f64,
}

impl LpSum {
    pub fn push(&mut self, x: f64) {
        match self.p {
            Exponent::Finite(1.0) => self.acc += x,
            Exponent::Finite(2.0) => self.acc += x * x,
            Exponent::Finite(p) => self.acc += x.powf(p),
            Exponent::Infinite => self.acc = self.acc.max(x),
        }
    }

    pub fn finish(self) -> f64 {
        match self.p {
            Exponent::Finite(1.0) => self.acc,
            Exponent::Finite(2.0) => self.acc.sqrt(),
            Exponent::Finite(p) => self.acc.powf(1.0 / p),
            Exponent::Infinite => self.acc,
        }
    }
}

/// Weights on side-diagonal offsets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightSpec {
    /// `v_r(m) = (1 + |m|_2)^r`.
    Polynomial(f64),
    /// `v*_r(m) = (1 + |2 pi m|_2^2)^{r/2}`.
    Bessel(f64),
}

impl WeightSpec {
    pub fn eval(&self, m: &LatticeIndex) -> f64 {
        match *self {
            Self::Polynomial(r) => polynomial_weight(m, r),
            Self::Bessel(r) => bessel_weight(m, r),
        }
    }

    pub fn order(&self) -> f64 {
        match *self {
            Self::Polynomial(r) | Self::Bessel(r) => r,
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(r) => write!(f, "poly:r={r}"),
            Self::Bessel(r) => write!(f, "bessel:r={r}"),
        }
    }
}

impl FromStr for WeightSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (kind, kv) = split_kind(s);
        let params = parse_params(kv, &["r"])?;
        let r = params.get_f64("r")?.unwrap_or(0.0);
        check_nonneg(r, "r")?;
        match kind {
            "poly" | "polynomial" => Ok(Self::Polynomial(r)),
            "bessel" => Ok(Self::Bessel(r)),
            other => Err(Error::Parse(format!("unknown weight kind `{other}`"))),
        }
    }
}

/// `(1 + |m|_2)^r`.
pub fn polynomial_weight(m: &LatticeIndex, r: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    (1.0 + m.l2_norm()).powf(r)
}

/// `(1 + |2 pi m|_2^2)^{r/2}`.
pub fn bessel_weight(m: &LatticeIndex, r: f64) -> f64 {
    let x = 2.0 * PI * m.l2_norm();
    (1.0 + x * x).powf(r / 2.0)
}

/// A norm evaluated on diagonally rescaled matrices.
pub trait MatrixNorm: Send + Sync {
    /// Norm of the matrix whose side diagonal `m` equals `mult(m) * A^(m)`.
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64;

    fn norm(&self, a: &LatticeMatrix) -> f64 {
        self.norm_scaled(a, &|_| ONE)
    }

    /// Whether the norm depends only on entrywise magnitudes, monotonically.
    fn is_solid(&self) -> bool;

    fn label(&self) -> String;

    /// For norms of the form `sup_m w(m) |mult(m)| sup_k |A(k, k-m)|`, the
    /// weights `w` on the stored diagonals of `a`, in iteration order.
    fn sup_weights(&self, _a: &LatticeMatrix) -> Option<Vec<f64>> {
        None
    }
}

/// One of the base algebra norms.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    /// Operator norm on `l^2`.
    OperatorL2,
    /// `sup_m v_r(m) sup_k |A(k, k-m)|`.
    Jaffard { r: f64 },
    /// Schur norm: max of the row-sup and column-sup weighted `l^p` sums.
    Schur { p: Exponent, r: f64 },
    /// `C^p_r`. With `literal = false`: `(sum_m (v_r(m) sup_k |A(k,k-m)|)^p)^{1/p}`;
    /// with `literal = true` every entry is summed:
    /// `(sum_m sum_k |A(k,k-m)|^p v_r(m)^p)^{1/p}`.
    CpDiag { p: Exponent, r: f64, literal: bool },
    /// Base norm of the matrix with diagonal `m` scaled by `w(m)`.
    Weighted { base: Box<NormSpec>, weight: WeightSpec },
}

impl NormSpec {
    pub fn jaffard(r: f64) -> Self {
        Self::Jaffard { r }
    }

    pub fn schur(p: Exponent, r: f64) -> Self {
        Self::Schur { p, r }
    }

    pub fn cpr(p: Exponent, r: f64) -> Self {
        Self::CpDiag { p, r, literal: false }
    }

    /// Weighted variant; refuses a non-solid base.
    pub fn weighted(base: NormSpec, weight: WeightSpec) -> Result<Self> {
        if !base.is_solid() {
            return Err(Error::NonSolidBase(base.to_string()));
        }
        Ok(Self::Weighted { base: Box::new(base), weight })
    }

    /// Checks parameter ranges and the solid-base requirement of weighted kinds.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::OperatorL2 => Ok(()),
            Self::Jaffard { r } | Self::Schur { r, .. } | Self::CpDiag { r, .. } => check_nonneg(*r, "r"),
            Self::Weighted { base, weight } => {
                if !base.is_solid() {
                    return Err(Error::NonSolidBase(base.to_string()));
                }
                check_nonneg(weight.order(), "weight order")?;
                base.validate()
            }
        }
    }

    /// Logs a warning when `(p, r)` falls outside the range where the class
    /// is an algebra: `p = 1, r >= 0` or `p > 1, r > d (1 - 1/p)`.
    fn warn_parameters(&self, dim: usize) {
        if let Self::Schur { p, r } | Self::CpDiag { p, r, .. } = self {
            let ok = match p {
                Exponent::Finite(q) if *q == 1.0 => *r >= 0.0,
                _ => *r > dim as f64 * (1.0 - p.reciprocal()),
            };
            if !ok {
                log::warn!("{self}: parameters outside the algebra range r > d(1 - 1/p) (d = {dim})");
            }
        }
    }
}

impl MatrixNorm for NormSpec {
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
        self.warn_parameters(a.dim());
        match self {
            Self::OperatorL2 => dense::spectral_norm(&a.map_diagonals(mult).to_dense()),
            Self::Jaffard { r } => a
                .diagonals()
                .map(|(m, d)| polynomial_weight(m, *r) * mult(m).norm() * d.sup())
                .fold(0.0, f64::max),
            Self::CpDiag { p, r, literal: false } => {
                p.norm_of(a.diagonals().map(|(m, d)| polynomial_weight(m, *r) * mult(m).norm() * d.sup()))
            }
            Self::CpDiag { p, r, literal: true } => {
                let mut s = p.sum();
                for (m, d) in a.diagonals() {
                    let f = polynomial_weight(m, *r) * mult(m).norm();
                    d.entries().iter().for_each(|z| s.push(f * z.norm()));
                }
                s.finish()
            }
            Self::Schur { p, r } => schur_scaled(a, *p, *r, mult),
            Self::Weighted { base, weight } => {
                base.norm_scaled(a, &|m| mult(m) * weight.eval(m))
            }
        }
    }

    fn is_solid(&self) -> bool {
        match self {
            Self::OperatorL2 => false,
            Self::Weighted { base, .. } => base.is_solid(),
            _ => true,
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }

    fn sup_weights(&self, a: &LatticeMatrix) -> Option<Vec<f64>> {
        match self {
            Self::Jaffard { r }
            | Self::CpDiag { p: Exponent::Infinite, r, literal: false }
            | Self::Schur { p: Exponent::Infinite, r } => {
                Some(a.diagonals().map(|(m, _)| polynomial_weight(m, *r)).collect())
            }
            Self::Weighted { base, weight } => {
                let mut w = base.sup_weights(a)?;
                w.iter_mut().zip(a.diagonals()).for_each(|(x, (m, _))| *x *= weight.eval(m));
                Some(w)
            }
            _ => None,
        }
    }
}

fn schur_scaled(a: &LatticeMatrix, p: Exponent, r: f64, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
    let n = a.window().size();
    let mut rows = vec![p.sum(); n];
    let mut cols = vec![p.sum(); n];
    let w = a.window();
    for (m, d) in a.diagonals() {
        let f = polynomial_weight(m, r) * mult(m).norm();
        if f == 0.0 {
            continue;
        }
        let e = d.entries();
        w.for_each_position(m, |i, row, col| {
            let x = f * e[i].norm();
            rows[row].push(x);
            cols[col].push(x);
        });
    }
    rows.into_iter()
        .chain(cols)
        .map(LpSum::finish)
        .fold(0.0, f64::max)
}

/// Largest singular value of the finite section.
pub fn op_norm_l2(a: &LatticeMatrix) -> f64 {
    NormSpec::OperatorL2.norm(a)
}

/// `sup_m (1 + |m|)^r sup_k |A(k, k-m)|`.
pub fn jaffard_norm(a: &LatticeMatrix, r: f64) -> f64 {
    NormSpec::jaffard(r).norm(a)
}

pub fn schur_norm(a: &LatticeMatrix, p: Exponent, r: f64) -> f64 {
    NormSpec::schur(p, r).norm(a)
}

/// Diagonal-sup form of the `C^p_r` norm.
pub fn cpr_norm(a: &LatticeMatrix, p: Exponent, r: f64) -> f64 {
    NormSpec::cpr(p, r).norm(a)
}

/// Entry-sum ("literal") form of the `C^p_r` norm.
pub fn cpr_norm_literal(a: &LatticeMatrix, p: Exponent, r: f64) -> f64 {
    NormSpec::CpDiag { p, r, literal: true }.norm(a)
}

pub fn weighted_norm(a: &LatticeMatrix, base: &NormSpec, w: WeightSpec) -> Result<f64> {
    Ok(NormSpec::weighted(base.clone(), w)?.norm(a))
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OperatorL2 => write!(f, "op"),
            Self::Jaffard { r } => write!(f, "jaffard:r={r}"),
            Self::Schur { p, r } => write!(f, "schur:p={p},r={r}"),
            Self::CpDiag { p, r, literal } => {
                write!(f, "cpr:p={p},r={r}")?;
                if *literal {
                    write!(f, ",literal=true")?;
                }
                Ok(())
            }
            Self::Weighted { base, weight } => write!(f, "w[{weight}]{base}"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    /// Grammar: `op`, `jaffard:r=R`, `schur:p=P,r=R`, `cpr:p=P,r=R[,literal=true]`,
    /// `w[poly:r=R]BASE`, `w[bessel:r=R]BASE`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("w[") {
            let close = rest
                .find(']')
                .ok_or_else(|| Error::Parse(format!("unterminated weight in `{s}`")))?;
            let weight: WeightSpec = rest[..close].parse()?;
            let base: NormSpec = rest[close + 1..].parse()?;
            return Self::weighted(base, weight);
        }
        let (kind, kv) = split_kind(s);
        let spec = match kind {
            "op" => {
                parse_params(kv, &[])?;
                Self::OperatorL2
            }
            "jaffard" => {
                let pr = parse_params(kv, &["r"])?;
                Self::Jaffard { r: pr.get_f64("r")?.unwrap_or(0.0) }
            }
            "schur" => {
                let pr = parse_params(kv, &["p", "r"])?;
                Self::Schur {
                    p: pr.get_exponent("p")?.unwrap_or(Exponent::Finite(1.0)),
                    r: pr.get_f64("r")?.unwrap_or(0.0),
                }
            }
            "cpr" => {
                let pr = parse_params(kv, &["p", "r", "literal"])?;
                Self::CpDiag {
                    p: pr.get_exponent("p")?.unwrap_or(Exponent::Finite(1.0)),
                    r: pr.get_f64("r")?.unwrap_or(0.0),
                    literal: pr.get_bool("literal")?.unwrap_or(false),
                }
            }
            other => return Err(Error::Parse(format!("unknown norm kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

// ---- small key=value grammar helpers, shared with the smoothness specs ----

pub(crate) fn split_kind(s: &str) -> (&str, &str) {
    match s.split_once(':') {
        Some((k, rest)) => (k.trim(), rest),
        None => (s.trim(), ""),
    }
}

pub(crate) struct Params<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

/// Parses `k=v,k=v` and rejects keys not in `allowed`.
pub(crate) fn parse_params<'a>(kv: &'a str, allowed: &[&str]) -> Result<Params<'a>> {
    let mut pairs = Vec::new();
    for item in kv.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
        let k = k.trim();
        if !allowed.contains(&k) {
            return Err(Error::Parse(format!("unknown key `{k}`")));
        }
        if pairs.iter().any(|(pk, _)| *pk == k) {
            return Err(Error::Parse(format!("duplicate key `{k}`")));
        }
        pairs.push((k, v.trim()));
    }
    Ok(Params { pairs })
}

impl<'a> Params<'a> {
    pub(crate) fn get(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub(crate) fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_f64(v, key)).transpose()
    }

    pub(crate) fn get_exponent(&self, key: &str) -> Result<Option<Exponent>> {
        self.get(key).map(str::parse).transpose()
    }

    pub(crate) fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Parse(format!("`{key}` expects a boolean, got `{v}`"))),
            })
            .transpose()
    }
}

pub(crate) fn parse_f64(v: &str, key: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}` expects a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn check_nonneg(r: f64, what: &str) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} = {r} must be a finite nonnegative number")))
    }
}
