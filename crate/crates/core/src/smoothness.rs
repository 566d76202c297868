//! Moduli of smoothness under the modulation group and Besov norms.
//!
//! Three evaluators are provided for `Lambda^p_r(A)`:
//!
//! * [`BesovMethod::ModulusDyadic`]: `|A| + (sum_l (2^{rl} w^k_{2^-l}(A))^p)^{1/p}`
//!   with the modulus sup over `|t| <= h` approximated on a uniform grid;
//! * [`BesovMethod::SolidLp`]: dyadic blocks of side diagonals,
//!   `(sum_{k>=-1} 2^{kpr} |sum_{floor(2^k) <= |l|_inf < 2^{k+1}} A^(l)|^p)^{1/p}`;
//! * [`BesovMethod::PhiLp`]: the smooth Littlewood-Paley filters of a
//!   [`DyadicPartition`] applied as diagonal multipliers.
//!
//! All evaluators work through [`MatrixNorm::norm_scaled`], so any of them can
//! itself serve as the base norm of another (used for reiteration).

use std::fmt;
use std::str::FromStr;
use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{difference_factor, LatticeIndex, LatticeMatrix};
use crate::norms::{parse_params, split_kind, polynomial_weight, Exponent, MatrixNorm, NormSpec};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default t-grid points per axis.
pub fn default_grid(dim: usize) -> usize {
    if dim == 1 {
        64
    } else {
        32
    }
}

/// `ceil(log2(2W))`, the last dyadic block that meets the window.
pub fn last_block(half_width: usize) -> i32 {
    let span = (2 * half_width).max(1) as f64;
    span.log2().ceil() as i32
}

/// Default dyadic level range `0 ..= ceil(log2(2W)) + 2`.
pub fn default_levels(half_width: usize) -> (u32, u32) {
    (0, (last_block(half_width) + 2) as u32)
}

/// Sample points `t` with `|t|_2 <= h` on a uniform `G^d` grid over
/// `[-h', h']^d`, `h' = min(h, 1/2)` (the action has period 1).
/// With `half = true` only one point of each `{t, -t}` pair is returned.
pub fn t_grid(dim: usize, h: f64, grid: usize, half: bool) -> Vec<Vec<f64>> {
    let hp = h.min(0.5);
    let g = grid.max(2);
    let node = |i: usize| -hp + 2.0 * hp * i as f64 / (g - 1) as f64;
    // index i pairs with g-1-i under t -> -t
    let keep = |i: usize, j: usize| !half || (i, j) >= (g - 1 - i, g - 1 - j);
    match dim {
        1 => (0..g).filter(|&i| keep(i, 0)).map(|i| vec![node(i)]).collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..g {
                for j in 0..g {
                    let t = [node(i), node(j)];
                    if keep(i, j) && (t[0] * t[0] + t[1] * t[1]).sqrt() <= h * (1.0 + 1e-12) {
                        out.push(t.to_vec());
                    }
                }
            }
            out
        }
    }
}

fn sup_over_grid(
    a: &LatticeMatrix,
    base: &dyn MatrixNorm,
    order: u32,
    h: f64,
    grid: usize,
    mult: &dyn Fn(&LatticeIndex) -> Complex64,
) -> f64 {
    t_grid(a.dim(), h, grid, base.is_solid())
        .iter()
        .map(|t| base.norm_scaled(a, &|m| mult(m) * difference_factor(m, t, order)))
        .fold(0.0, f64::max)
}

/// `w^k_h(A) = sup_{|t| <= h} |Delta^k_t A|`, the sup taken over a uniform grid of
/// `G^d` points (grid endpoints included).
pub fn modulus(a: &LatticeMatrix, base: &dyn MatrixNorm, order: u32, h: f64, grid: usize) -> Result<f64> {
    if grid < 8 {
        return Err(Error::InvalidParameter(format!("grid size {grid} < 8")));
    }
    if order == 0 {
        return Err(Error::InvalidParameter("difference order must be >= 1".into()));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    Ok(sup_over_grid(a, base, order, h, grid, &|_| ONE))
}

/// Modulus-based Besov norm over an arbitrary base norm.
pub struct ModulusBesov<'a> {
    pub base: &'a dyn MatrixNorm,
    pub r: f64,
    pub p: Exponent,
    pub order: u32,
    /// `(L_min, L_max)`; `None` uses [`default_levels`].
    pub levels: Option<(u32, u32)>,
    /// Points per axis; `None` uses [`default_grid`].
    pub grid: Option<usize>,
}

// Per-diagonal running maxima of |e(m.t) - 1|^k over the grids of levels l..=L_max,
// for bases that are weighted sups over diagonals. Shared across evaluations.
type ProfileKey = (usize, u32, (u32, u32), usize, Vec<LatticeIndex>);
type ProfileTable = Arc<Vec<Vec<f64>>>;

const PROFILE_CACHE_LIMIT: usize = 64;

static PROFILES: LazyLock<Mutex<HashMap<ProfileKey, ProfileTable>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

impl<'a> ModulusBesov<'a> {
    pub fn new(base: &'a dyn MatrixNorm, r: f64, p: Exponent) -> Self {
        Self { base, r, p, order: default_order(r), levels: None, grid: None }
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        self
    }

    pub fn with_levels(mut self, levels: Option<(u32, u32)>) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_grid(mut self, grid: Option<usize>) -> Self {
        self.grid = grid;
        self
    }

    /// Dyadic moduli `w^k_{2^-l}` for `l` in the level range, made monotone in
    /// `h` by carrying the running max from fine to coarse levels.
    pub fn dyadic_moduli(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> Vec<(u32, f64)> {
        let (lmin, lmax) = self.levels.unwrap_or_else(|| default_levels(a.half_width()));
        let grid = self.grid.unwrap_or_else(|| default_grid(a.dim()));
        if let Some(w) = self.base.sup_weights(a) {
            return self.dyadic_moduli_sup(a, mult, &w, (lmin, lmax), grid);
        }
        let mut out = Vec::with_capacity((lmax - lmin + 1) as usize);
        let mut running = 0.0f64;
        for l in (lmin..=lmax).rev() {
            let h = 2f64.powi(-(l as i32));
            running = running.max(sup_over_grid(a, self.base, self.order, h, grid, mult));
            out.push((l, running));
        }
        out.reverse();
        out
    }

    // The sup over t commutes with the sup over diagonals, so each diagonal only
    // needs its own maximal difference factor per level.
    fn dyadic_moduli_sup(
        &self,
        a: &LatticeMatrix,
        mult: &dyn Fn(&LatticeIndex) -> Complex64,
        weights: &[f64],
        levels: (u32, u32),
        grid: usize,
    ) -> Vec<(u32, f64)> {
        let table = self.profile_table(a, levels, grid);
        let scale: Vec<f64> =
            a.diagonals().zip(weights).map(|((m, d), w)| w * mult(m).norm() * d.sup()).collect();
        (levels.0..=levels.1)
            .enumerate()
            .map(|(i, l)| (l, scale.iter().zip(table.iter()).map(|(s, row)| s * row[i]).fold(0.0, f64::max)))
            .collect()
    }

    fn profile_table(&self, a: &LatticeMatrix, levels: (u32, u32), grid: usize) -> ProfileTable {
        let offsets: Vec<LatticeIndex> = a.diagonals().map(|(m, _)| *m).collect();
        let key = (a.dim(), self.order, levels, grid, offsets);
        if let Some(t) = PROFILES.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return t.clone();
        }
        let n = (levels.1 - levels.0 + 1) as usize;
        let grids: Vec<Vec<Vec<f64>>> =
            (levels.0..=levels.1).map(|l| t_grid(a.dim(), 2f64.powi(-(l as i32)), grid, true)).collect();
        let table: Vec<Vec<f64>> = key
            .4
            .iter()
            .map(|m| {
                let mut row = vec![0.0; n];
                let mut running = 0.0f64;
                for i in (0..n).rev() {
                    let best =
                        grids[i].iter().map(|t| difference_factor(m, t, self.order).norm()).fold(0.0, f64::max);
                    running = running.max(best);
                    row[i] = running;
                }
                row
            })
            .collect();
        let table = Arc::new(table);
        let mut cache = PROFILES.lock().unwrap_or_else(|e| e.into_inner());
        if cache.len() >= PROFILE_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, table.clone());
        table
    }
}

impl MatrixNorm for ModulusBesov<'_> {
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
        let base = self.base.norm_scaled(a, mult);
        let semi = self
            .p
            .norm_of(self.dyadic_moduli(a, mult).into_iter().map(|(l, w)| 2f64.powf(self.r * l as f64) * w));
        base + semi
    }

    fn is_solid(&self) -> bool {
        self.base.is_solid()
    }

    fn label(&self) -> String {
        format!("besov-modulus[{}](r={},p={},k={})", self.base.label(), self.r, self.p, self.order)
    }
}

/// Dyadic block of side diagonals: `floor(2^k) <= |l|_inf < 2^{k+1}`, `k >= -1`.
pub fn in_block(k: i32, l: &LatticeIndex) -> bool {
    let u = l.sup_norm();
    let (lo, hi) = if k < 0 { (0, 1) } else { (1u64 << k, 1u64 << (k + 1)) };
    u >= lo && u < hi
}

/// Solid Littlewood-Paley norm over dyadic diagonal blocks.
pub struct SolidLpBesov<'a> {
    pub base: &'a dyn MatrixNorm,
    pub r: f64,
    pub p: Exponent,
}

impl SolidLpBesov<'_> {
    /// `(k, 2^{kr} |block_k(A)|)` for `k = -1 ..= ceil(log2(2W))`.
    pub fn weighted_blocks(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> Vec<(i32, f64)> {
        (-1..=last_block(a.half_width()))
            .map(|k| {
                let v = self.base.norm_scaled(a, &|m| if in_block(k, m) { mult(m) } else { Complex64::new(0.0, 0.0) });
                (k, 2f64.powf(self.r * k as f64) * v)
            })
            .collect()
    }
}

impl MatrixNorm for SolidLpBesov<'_> {
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
        self.p.norm_of(self.weighted_blocks(a, mult).into_iter().map(|(_, v)| v))
    }

    fn is_solid(&self) -> bool {
        self.base.is_solid()
    }

    fn label(&self) -> String {
        format!("besov-solidlp[{}](r={},p={})", self.base.label(), self.r, self.p)
    }
}

/// Smooth dyadic partition of unity sampled at integer frequencies.
///
/// The profile is `phi(w) = g(|w|_inf) / sum_{j in Z} g(2^-j |w|_inf)` with the
/// log-scale bump `g(u) = exp(-1 / (1 - log2(u)^2))` supported on `[1/2, 2]`.
/// Because the normaliser is dilation invariant, `sum_k phi(2^-k w) = 1` for
/// `w != 0` up to round-off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicPartition {
    max_level: i32,
}

impl DyadicPartition {
    /// Partition with levels `-1 ..= max_level`.
    pub fn new(max_level: i32) -> Self {
        Self { max_level: max_level.max(0) }
    }

    /// Levels sufficient to cover every offset of a half-width `W` window.
    pub fn for_window(half_width: usize) -> Self {
        Self::new(last_block(half_width) + 1)
    }

    pub fn max_level(&self) -> i32 {
        self.max_level
    }

    fn bump(u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let s = u.log2();
        if s.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s * s)).exp()
        }
    }

    /// The profile `phi` as a function of `u = |w|_inf`.
    pub fn profile(u: f64) -> f64 {
        let g = Self::bump(u);
        if g == 0.0 {
            return 0.0;
        }
        let c = u.log2().floor() as i32;
        let denom: f64 = (c - 1..=c + 2).map(|j| Self::bump(u * 2f64.powi(-j))).sum();
        g / denom
    }

    /// `phi_k(l)`, with `phi_{-1} = 1 - sum_{k >= 0} phi_k`.
    pub fn weight(&self, k: i32, l: &LatticeIndex) -> f64 {
        let u = l.sup_norm() as f64;
        if k >= 0 {
            return Self::profile(u * 2f64.powi(-k));
        }
        if u == 0.0 {
            return 1.0;
        }
        // only levels with 2^{k-1} < u < 2^{k+1} contribute
        let top = u.log2().floor() as i32 + 2;
        1.0 - (0..=top).map(|j| Self::profile(u * 2f64.powi(-j))).sum::<f64>()
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> {
        -1..=self.max_level
    }
}

/// Littlewood-Paley norm with smooth filters.
pub struct PhiLpBesov<'a> {
    pub base: &'a dyn MatrixNorm,
    pub r: f64,
    pub p: Exponent,
    /// `None` uses [`DyadicPartition::for_window`].
    pub partition: Option<DyadicPartition>,
}

impl PhiLpBesov<'_> {
    pub fn weighted_blocks(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> Vec<(i32, f64)> {
        let part = self.partition.unwrap_or_else(|| DyadicPartition::for_window(a.half_width()));
        part.levels()
            .map(|k| {
                let v = self.base.norm_scaled(a, &|m| mult(m) * part.weight(k, m));
                (k, 2f64.powf(self.r * k as f64) * v)
            })
            .collect()
    }
}

impl MatrixNorm for PhiLpBesov<'_> {
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
        self.p.norm_of(self.weighted_blocks(a, mult).into_iter().map(|(_, v)| v))
    }

    fn is_solid(&self) -> bool {
        self.base.is_solid()
    }

    fn label(&self) -> String {
        format!("besov-philp[{}](r={},p={})", self.base.label(), self.r, self.p)
    }
}

/// `floor(r) + 1`.
pub fn default_order(r: f64) -> u32 {
    r.floor() as u32 + 1
}

/// Evaluation method of a [`BesovSpec`].
#[derive(Clone, Debug, PartialEq)]
pub enum BesovMethod {
    ModulusDyadic { levels: Option<(u32, u32)>, grid: Option<usize> },
    SolidLp,
    PhiLp,
}

/// A Besov norm `Lambda^p_r(base)` together with its evaluation method.
#[derive(Clone, Debug, PartialEq)]
pub struct BesovSpec {
    base: NormSpec,
    r: f64,
    p: Exponent,
    order: u32,
    method: BesovMethod,
}

impl BesovSpec {
    pub fn new(base: NormSpec, r: f64, p: Exponent, method: BesovMethod) -> Result<Self> {
        Self::with_order(base, r, p, default_order(r), method)
    }

    pub fn with_order(base: NormSpec, r: f64, p: Exponent, order: u32, method: BesovMethod) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("smoothness r = {r} must be positive")));
        }
        if (order as f64) <= r.floor() {
            return Err(Error::InvalidParameter(format!("order {order} must exceed floor(r) = {}", r.floor())));
        }
        base.validate()?;
        match &method {
            BesovMethod::SolidLp if !base.is_solid() => return Err(Error::NonSolidBase(base.to_string())),
            BesovMethod::ModulusDyadic { levels, grid } => {
                if let Some((lo, hi)) = levels {
                    if lo > hi {
                        return Err(Error::InvalidParameter(format!("level range {lo}..{hi} is empty")));
                    }
                }
                if let Some(g) = grid {
                    if *g < 8 {
                        return Err(Error::InvalidParameter(format!("grid size {g} < 8")));
                    }
                }
            }
            _ => {}
        }
        Ok(Self { base, r, p, order, method })
    }

    pub fn base(&self) -> &NormSpec {
        &self.base
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn method(&self) -> &BesovMethod {
        &self.method
    }
}

impl MatrixNorm for BesovSpec {
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
        match &self.method {
            BesovMethod::ModulusDyadic { levels, grid } => ModulusBesov::new(&self.base, self.r, self.p)
                .with_order(self.order)
                .with_levels(*levels)
                .with_grid(*grid)
                .norm_scaled(a, mult),
            BesovMethod::SolidLp => SolidLpBesov { base: &self.base, r: self.r, p: self.p }.norm_scaled(a, mult),
            BesovMethod::PhiLp => {
                PhiLpBesov { base: &self.base, r: self.r, p: self.p, partition: None }.norm_scaled(a, mult)
            }
        }
    }

    fn is_solid(&self) -> bool {
        self.base.is_solid()
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BesovSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.base.to_string();
        if base.contains(',') {
            write!(f, "besov:base=[{base}]")?;
        } else {
            write!(f, "besov:base={base}")?;
        }
        write!(f, ",r={},p={},k={}", self.r, self.p, self.order)?;
        match &self.method {
            BesovMethod::SolidLp => write!(f, ",method=solidlp"),
            BesovMethod::PhiLp => write!(f, ",method=philp"),
            BesovMethod::ModulusDyadic { levels, grid } => {
                write!(f, ",method=modulus")?;
                if let Some((lo, hi)) = levels {
                    write!(f, ",lmin={lo},lmax={hi}")?;
                }
                if let Some(g) = grid {
                    write!(f, ",grid={g}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for BesovSpec {
    type Err = Error;

    /// `besov:base=<norm>,r=R,p=P[,k=K][,method=modulus|solidlp|philp][,lmin=..,lmax=..][,grid=G]`.
    /// A base norm containing commas must be bracketed: `base=[schur:p=1,r=0]`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = split_kind(s.trim());
        if kind != "besov" {
            return Err(Error::Parse(format!("expected `besov:...`, got `{s}`")));
        }
        let rest = rest.trim();
        let body = rest
            .strip_prefix("base=")
            .ok_or_else(|| Error::Parse("besov spec must start with `base=`".into()))?;
        let (base_str, tail) = split_base(body)?;
        let base: NormSpec = base_str.parse()?;
        let pr = parse_params(tail, &["r", "p", "k", "method", "lmin", "lmax", "grid"])?;
        let r = pr.get_f64("r")?.ok_or_else(|| Error::Parse("besov spec needs `r`".into()))?;
        let p = pr.get_exponent("p")?.ok_or_else(|| Error::Parse("besov spec needs `p`".into()))?;
        let order = match pr.get("k") {
            Some(k) => k.parse().map_err(|_| Error::Parse(format!("`k` expects an integer, got `{k}`")))?,
            None => default_order(r),
        };
        let parse_u = |key: &str| -> Result<Option<u32>> {
            pr.get(key)
                .map(|v| v.parse().map_err(|_| Error::Parse(format!("`{key}` expects an integer, got `{v}`"))))
                .transpose()
        };
        let method = match pr.get("method").unwrap_or("modulus") {
            "modulus" => {
                let levels = match (parse_u("lmin")?, parse_u("lmax")?) {
                    (None, None) => None,
                    (Some(lo), Some(hi)) => Some((lo, hi)),
                    _ => return Err(Error::Parse("`lmin` and `lmax` must be given together".into())),
                };
                let grid = parse_u("grid")?.map(|g| g as usize);
                BesovMethod::ModulusDyadic { levels, grid }
            }
            other => {
                if ["lmin", "lmax", "grid"].iter().any(|k| pr.get(k).is_some()) {
                    return Err(Error::Parse(format!("`lmin`/`lmax`/`grid` only apply to method=modulus, not {other}")));
                }
                match other {
                    "solidlp" => BesovMethod::SolidLp,
                    "philp" => BesovMethod::PhiLp,
                    _ => return Err(Error::Parse(format!("unknown besov method `{other}`"))),
                }
            }
        };
        Self::with_order(base, r, p, order, method)
    }
}

/// Splits `base=<norm>,rest` at the end of the base norm.
pub(crate) fn split_base(body: &str) -> Result<(&str, &str)> {
    if let Some(inner) = body.strip_prefix('[') {
        let mut depth = 1;
        for (i, c) in inner.char_indices() {
            match c {
                '[' => depth += 1,
                ']' => {
                    depth -= 1;
                    if depth == 0 {
                        let tail = inner[i + 1..].trim_start();
                        let tail = tail.strip_prefix(',').unwrap_or(tail);
                        return Ok((&inner[..i], tail));
                    }
                }
                _ => {}
            }
        }
        return Err(Error::Parse("unbalanced brackets in base".into()));
    }
    Ok(match body.split_once(',') {
        Some((b, t)) => (b, t),
        None => (body, ""),
    })
}

/// Either a base norm or a Besov norm, as accepted on command lines and in reports.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyNorm {
    Base(NormSpec),
    Besov(BesovSpec),
}

impl FromStr for AnyNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if split_kind(s.trim()).0 == "besov" {
            Ok(Self::Besov(s.parse()?))
        } else {
            Ok(Self::Base(s.parse()?))
        }
    }
}

impl fmt::Display for AnyNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Base(n) => n.fmt(f),
            Self::Besov(b) => b.fmt(f),
        }
    }
}

impl MatrixNorm for AnyNorm {
    fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
        match self {
            Self::Base(n) => n.norm_scaled(a, mult),
            Self::Besov(b) => b.norm_scaled(a, mult),
        }
    }

    fn is_solid(&self) -> bool {
        match self {
            Self::Base(n) => n.is_solid(),
            Self::Besov(b) => b.is_solid(),
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }

    fn sup_weights(&self, a: &LatticeMatrix) -> Option<Vec<f64>> {
        match self {
            Self::Base(n) => n.sup_weights(a),
            Self::Besov(_) => None,
        }
    }
}

/// Modulus-form Besov norm; refuses specs with another method.
pub fn besov_norm_modulus(a: &LatticeMatrix, spec: &BesovSpec) -> Result<f64> {
    match spec.method {
        BesovMethod::ModulusDyadic { .. } => Ok(spec.norm(a)),
        _ => Err(Error::InvalidParameter(format!("{spec} does not use method=modulus"))),
    }
}

/// Solid dyadic-block Littlewood-Paley norm.
pub fn besov_norm_solid_lp(a: &LatticeMatrix, base: &NormSpec, r: f64, p: Exponent) -> Result<f64> {
    if !base.is_solid() {
        return Err(Error::NonSolidBase(base.to_string()));
    }
    Ok(SolidLpBesov { base, r, p }.norm(a))
}

/// Smooth-filter Littlewood-Paley norm.
pub fn besov_norm_phi_lp(a: &LatticeMatrix, base: &NormSpec, r: f64, p: Exponent, partition: &DyadicPartition) -> f64 {
    PhiLpBesov { base, r, p, partition: Some(*partition) }.norm(a)
}

/// Ratio of the iterated norm `Lambda^p_s(Lambda^p_r)` to `Lambda^p_{r+s}`,
/// both evaluated with the modulus method.
pub fn reiteration_ratio(a: &LatticeMatrix, base: &NormSpec, r: f64, s: f64, p: Exponent) -> Result<f64> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(format!("reiteration needs r, s > 0 (got {r}, {s})")));
    }
    if a.is_zero() {
        return Err(Error::Degenerate("reiteration ratio of the zero matrix is 0/0".into()));
    }
    let inner = ModulusBesov::new(base, r, p);
    let outer = ModulusBesov::new(&inner, s, p);
    let direct = ModulusBesov::new(base, r + s, p);
    Ok(outer.norm(a) / direct.norm(a))
}

/// Output of [`continuity_defect`].
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    /// `(h, w^1_h(A))`.
    pub moduli: Vec<(f64, f64)>,
    /// `(N, sup_{|k|_inf > N} v_r(k) |A^(k)|_op)` for `N = 0 ..= 2W`.
    pub tail: Vec<(usize, f64)>,
    /// Weight order `r` used for the tail profile.
    pub tail_order: f64,
}

/// Polynomial weight order carried by a base norm (0 for the operator norm).
fn tail_order(base: &NormSpec) -> f64 {
    match base {
        NormSpec::OperatorL2 => 0.0,
        NormSpec::Jaffard { r } | NormSpec::Schur { r, .. } | NormSpec::CpDiag { r, .. } => *r,
        NormSpec::Weighted { base, weight } => match weight {
            crate::norms::WeightSpec::Polynomial(s) => tail_order(base) + s,
            crate::norms::WeightSpec::Bessel(s) => tail_order(base) + s,
        },
    }
}

/// First-order moduli along a decreasing `h` sequence, plus the weighted
/// tail profile of side diagonals.
pub fn continuity_defect(a: &LatticeMatrix, base: &NormSpec, hs: &[f64]) -> Result<ContinuityReport> {
    if hs.windows(2).any(|w| w[1] >= w[0]) || hs.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidParameter("h-sequence must be positive and strictly decreasing".into()));
    }
    let grid = default_grid(a.dim());
    let moduli = hs
        .iter()
        .map(|&h| Ok((h, modulus(a, base, 1, h, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let r = tail_order(base);
    let tail = (0..=a.window().max_offset())
        .map(|n| {
            let v = a
                .diagonals()
                .filter(|(m, _)| m.sup_norm() as usize > n)
                .map(|(m, d)| polynomial_weight(m, r) * d.sup())
                .fold(0.0, f64::max);
            (n, v)
        })
        .collect();
    Ok(ContinuityReport { moduli, tail, tail_order: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn single(w: usize, m: i64) -> LatticeMatrix {
        LatticeMatrix::single_diagonal(1, w, LatticeIndex::d1(m), ONE).unwrap()
    }

    // Hides `sup_weights` so the generic grid path runs.
    struct Opaque<'a>(&'a NormSpec);

    impl MatrixNorm for Opaque<'_> {
        fn norm_scaled(&self, a: &LatticeMatrix, mult: &dyn Fn(&LatticeIndex) -> Complex64) -> f64 {
            self.0.norm_scaled(a, mult)
        }
        fn is_solid(&self) -> bool {
            self.0.is_solid()
        }
        fn label(&self) -> String {
            self.0.label()
        }
    }

    #[test]
    fn sup_fast_path_matches_grid() {
        let a = LatticeMatrix::from_fn(1, 12, |k, l| {
            let (k, l) = (k.coords()[0], l.coords()[0]);
            Complex64::new(1.0 / (1.0 + ((k - l) as f64).powi(2)), 0.1 * ((k + l) % 3) as f64)
        })
        .unwrap();
        for spec in ["jaffard:r=1", "cpr:p=inf,r=0.5", "w[bessel:r=1]jaffard:r=0"] {
            let base: NormSpec = spec.parse().unwrap();
            let opaque = Opaque(&base);
            for p in [Exponent::new(1.0).unwrap(), Exponent::new(2.5).unwrap(), Exponent::Infinite] {
                let fast = ModulusBesov::new(&base, 1.3, p);
                let slow = ModulusBesov::new(&opaque, 1.3, p);
                assert_relative_eq!(fast.norm(&a), slow.norm(&a), max_relative = 1e-13);
                // second call reuses the cached profile
                let mult = |m: &LatticeIndex| Complex64::new(1.0, m.coords()[0] as f64);
                assert_relative_eq!(fast.norm_scaled(&a, &mult), slow.norm_scaled(&a, &mult), max_relative = 1e-13);
            }
        }
        let a2 = LatticeMatrix::from_fn(2, 3, |k, l| {
            let d = (k.coords()[0] - l.coords()[0]).abs() + (k.coords()[1] - l.coords()[1]).abs();
            Complex64::new(1.0 / (1.0 + d as f64), 0.0)
        })
        .unwrap();
        let base = NormSpec::jaffard(1.0);
        let fast = ModulusBesov::new(&base, 0.7, Exponent::Infinite).with_grid(Some(12));
        let opaque = Opaque(&base);
        let slow = ModulusBesov::new(&opaque, 0.7, Exponent::Infinite).with_grid(Some(12));
        assert_relative_eq!(fast.norm(&a2), slow.norm(&a2), max_relative = 1e-13);
    }

    #[test]
    fn modulus_of_main_diagonal_vanishes() {
        let a = LatticeMatrix::from_fn(1, 6, |k, l| {
            if k == l { Complex64::new(k.coords()[0] as f64, 1.0) } else { Complex64::new(0.0, 0.0) }
        })
        .unwrap();
        for order in 1..4 {
            for h in [0.01, 0.3, 1.0] {
                assert_eq!(modulus(&a, &NormSpec::OperatorL2, order, h, 16).unwrap(), 0.0);
                assert_eq!(modulus(&a, &NormSpec::jaffard(1.0), order, h, 16).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn modulus_single_diagonal_closed_form() {
        let a = single(8, 1);
        for h in [0.05, 0.125, 0.3, 0.5] {
            let w = modulus(&a, &NormSpec::OperatorL2, 1, h, 64).unwrap();
            assert_relative_eq!(w, 2.0 * (PI * h).sin(), max_relative = 1e-9);
            let wj = modulus(&a, &NormSpec::jaffard(0.0), 1, h, 64).unwrap();
            assert_relative_eq!(wj, 2.0 * (PI * h).sin(), max_relative = 1e-12);
        }
    }

    #[test]
    fn modulus_bounded_by_twice_norm() {
        let a = LatticeMatrix::from_fn(1, 8, |k, l| {
            let d = (k.coords()[0] - l.coords()[0]) as f64;
            Complex64::from_polar(1.0 / (1.0 + d.abs()).powi(2), 0.7 * d)
        })
        .unwrap();
        for base in [NormSpec::jaffard(1.0), NormSpec::schur(Exponent::Finite(1.0), 0.5)] {
            let w = modulus(&a, &base, 1, 0.5, 64).unwrap();
            assert!(w <= 2.0 * base.norm(&a) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn modulus_rejects_small_grid() {
        assert!(modulus(&single(4, 1), &NormSpec::OperatorL2, 1, 0.1, 4).is_err());
    }

    #[test]
    fn besov_modulus_main_diagonal_is_base_norm() {
        let a = LatticeMatrix::identity(1, 8).unwrap().scale(Complex64::new(3.0, 0.0));
        let spec = BesovSpec::new(
            NormSpec::OperatorL2,
            0.5,
            Exponent::Infinite,
            BesovMethod::ModulusDyadic { levels: None, grid: None },
        )
        .unwrap();
        assert_relative_eq!(besov_norm_modulus(&a, &spec).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn besov_modulus_single_diagonal_oracle() {
        let w = 8;
        let a = single(w, 1);
        let spec = BesovSpec::new(
            NormSpec::OperatorL2,
            0.5,
            Exponent::Infinite,
            BesovMethod::ModulusDyadic { levels: None, grid: None },
        )
        .unwrap();
        // closed form: w_{2^-l} = 2 sin(pi min(2^-l, 1/2))
        let (lo, hi) = default_levels(w);
        let expected = 1.0
            + (lo..=hi)
                .map(|l| {
                    let h = 2f64.powi(-(l as i32)).min(0.5);
                    2f64.powf(0.5 * l as f64) * 2.0 * (PI * h).sin()
                })
                .fold(0.0, f64::max);
        assert_relative_eq!(besov_norm_modulus(&a, &spec).unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn besov_homogeneity() {
        let a = LatticeMatrix::from_fn(1, 6, |k, l| {
            let d = (k.coords()[0] - l.coords()[0]).abs() as f64;
            Complex64::new((1.0 + d).powf(-2.5), 0.0)
        })
        .unwrap();
        let c = Complex64::new(-1.5, 2.0);
        for method in [BesovMethod::ModulusDyadic { levels: None, grid: Some(16) }, BesovMethod::SolidLp, BesovMethod::PhiLp] {
            let spec = BesovSpec::new(NormSpec::jaffard(0.0), 1.0, Exponent::Finite(1.0), method).unwrap();
            assert_relative_eq!(spec.norm(&a.scale(c)), 2.5 * spec.norm(&a), max_relative = 1e-12);
        }
    }

    #[test]
    fn solid_lp_cases() {
        let base = NormSpec::jaffard(0.0);
        let r = 1.5;
        let id = LatticeMatrix::identity(1, 8).unwrap();
        // single k = -1 block with weight 2^{-r}
        assert_relative_eq!(
            besov_norm_solid_lp(&id, &base, r, Exponent::Finite(2.0)).unwrap(),
            2f64.powf(-r),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            besov_norm_solid_lp(&single(8, 4), &base, 1.0, Exponent::Infinite).unwrap(),
            4.0
        );
        assert_eq!(
            besov_norm_solid_lp(&LatticeMatrix::zeros(1, 8).unwrap(), &base, 1.0, Exponent::Finite(1.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            besov_norm_solid_lp(&id, &NormSpec::OperatorL2, 1.0, Exponent::Infinite),
            Err(Error::NonSolidBase(_))
        ));
    }

    #[test]
    fn partition_profile_support_and_positivity() {
        assert_eq!(DyadicPartition::profile(0.5), 0.0);
        assert_eq!(DyadicPartition::profile(2.0), 0.0);
        assert_eq!(DyadicPartition::profile(0.4), 0.0);
        assert_eq!(DyadicPartition::profile(2.5), 0.0);
        for i in 1..100 {
            let u = 0.5 + 1.5 * i as f64 / 100.0;
            assert!(DyadicPartition::profile(u) > 0.0, "{u}");
        }
    }

    #[test]
    fn partition_of_unity_at_integers() {
        let part = DyadicPartition::for_window(64);
        for u in 0..=128i64 {
            for l in [LatticeIndex::d1(u), LatticeIndex::d1(-u), LatticeIndex::d2(u, u / 3)] {
                let s: f64 = part.levels().map(|k| part.weight(k, &l)).sum();
                assert!((s - 1.0).abs() < 1e-12, "l = {l}: {s}");
            }
        }
        assert_eq!(part.weight(-1, &LatticeIndex::d1(0)), 1.0);
        assert!(part.weight(-1, &LatticeIndex::d1(1)).abs() < 1e-15);
    }

    #[test]
    fn phi_lp_cases() {
        let base = NormSpec::jaffard(0.0);
        let part = DyadicPartition::for_window(8);
        let id = LatticeMatrix::identity(1, 8).unwrap();
        assert_relative_eq!(besov_norm_phi_lp(&id, &base, 1.0, Exponent::Infinite, &part), 0.5);
        // single diagonal m = 3 only sees levels 1 and 2
        let a = single(8, 3);
        let l = LatticeIndex::d1(3);
        let w1 = part.weight(1, &l);
        let w2 = part.weight(2, &l);
        assert!(w1 > 0.0 && w2 > 0.0);
        assert!((w1 + w2 - 1.0).abs() < 1e-14);
        for k in part.levels().filter(|k| *k != 1 && *k != 2) {
            assert_eq!(part.weight(k, &l), 0.0);
        }
        let v = besov_norm_phi_lp(&a, &base, 1.0, Exponent::Finite(1.0), &part);
        assert_relative_eq!(v, 2.0 * w1 + 4.0 * w2, max_relative = 1e-14);
    }

    #[test]
    fn phi_filters_reconstruct() {
        let a = LatticeMatrix::from_fn(1, 10, |k, l| {
            Complex64::new((k.coords()[0] - 2 * l.coords()[0]) as f64, 1.0)
        })
        .unwrap();
        let part = DyadicPartition::for_window(10);
        let mut sum = LatticeMatrix::zeros(1, 10).unwrap();
        for k in part.levels() {
            let filtered = a.map_diagonals(|m| Complex64::new(part.weight(k, m), 0.0));
            sum = sum.add(&filtered).unwrap();
        }
        assert!(sum.max_abs_diff(&a).unwrap() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn reiteration_cases() {
        let a = LatticeMatrix::identity(1, 6).unwrap();
        assert_relative_eq!(
            reiteration_ratio(&a, &NormSpec::jaffard(0.0), 0.5, 0.5, Exponent::Infinite).unwrap(),
            1.0
        );
        assert!(matches!(
            reiteration_ratio(&LatticeMatrix::zeros(1, 6).unwrap(), &NormSpec::jaffard(0.0), 0.5, 0.5, Exponent::Infinite),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn continuity_cases() {
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let id = LatticeMatrix::identity(1, 6).unwrap();
        let rep = continuity_defect(&id, &NormSpec::jaffard(0.0), &hs).unwrap();
        assert!(rep.moduli.iter().all(|(_, w)| *w == 0.0));
        let rep = continuity_defect(&single(6, 1), &NormSpec::jaffard(0.0), &hs).unwrap();
        for (h, w) in rep.moduli {
            assert_relative_eq!(w, 2.0 * (PI * h).sin(), max_relative = 1e-12);
        }
        let r = 2.0;
        let a = LatticeMatrix::from_fn(1, 6, |k, l| {
            Complex64::new((1.0 + (k.coords()[0] - l.coords()[0]).abs() as f64).powf(-r), 0.0)
        })
        .unwrap();
        let rep = continuity_defect(&a, &NormSpec::jaffard(r), &hs).unwrap();
        for (n, v) in &rep.tail[..12] {
            assert_relative_eq!(*v, 1.0, max_relative = 1e-13, epsilon = 0.0);
            assert!(*n < 12);
        }
        assert!(continuity_defect(&a, &NormSpec::jaffard(r), &[0.1, 0.2]).is_err());
    }

    #[test]
    fn besov_grammar() {
        let s = "besov:base=jaffard:r=0,r=1.5,p=inf,method=solidlp";
        let spec: BesovSpec = s.parse().unwrap();
        assert_eq!(spec.base(), &NormSpec::jaffard(0.0));
        assert_eq!(spec.order(), 2);
        assert_eq!(spec.method(), &BesovMethod::SolidLp);
        assert_eq!(spec.to_string().parse::<BesovSpec>().unwrap(), spec);
        let s2 = "besov:base=[schur:p=1,r=0],r=0.5,p=2,method=modulus,lmin=0,lmax=6,grid=16";
        let spec2: BesovSpec = s2.parse().unwrap();
        assert_eq!(spec2.base(), &NormSpec::schur(Exponent::Finite(1.0), 0.0));
        assert_eq!(spec2.to_string().parse::<BesovSpec>().unwrap(), spec2);
        for bad in [
            "besov:base=op,r=1,p=inf,method=solidlp",
            "besov:base=jaffard:r=0,r=1.5,p=inf,k=1",
            "besov:base=jaffard:r=0,r=1,p=inf,colour=red",
            "besov:base=jaffard:r=0,p=inf",
            "besov:base=jaffard:r=0,r=1,p=inf,method=solidlp,grid=16",
        ] {
            assert!(bad.parse::<BesovSpec>().is_err(), "{bad}");
        }
    }
}
