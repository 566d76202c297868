//! Diagonal-major matrices over finite windows of the integer lattice.
//!
//! A [`LatticeMatrix`] stores, for every side-diagonal offset `m`, the vector
//! of entries `A(k, k - m)` for all `k` with both `k` and `k - m` inside the
//! window `[-W, W]^d`. Entries along a diagonal are ordered by the row index
//! `k`, lexicographically with the first axis outermost. Absent diagonals are
//! zero.
//!
//! All group-action operations (modulation, differences, derivations) scale
//! whole diagonals and therefore cost `O(#diagonals x diagonal length)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense;
use crate::error::{Error, Result};

/// A point (or offset) of `Z^d`, `d` in `{1, 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeIndex {
    dim: u8,
    coords: [i64; 2],
}

impl LatticeIndex {
    pub fn new(coords: &[i64]) -> Result<Self> {
        match coords {
            [a] => Ok(Self::d1(*a)),
            [a, b] => Ok(Self::d2(*a, *b)),
            _ => Err(Error::UnsupportedDim(coords.len())),
        }
    }

    pub const fn d1(m: i64) -> Self {
        Self { dim: 1, coords: [m, 0] }
    }

    pub const fn d2(a: i64, b: i64) -> Self {
        Self { dim: 2, coords: [a, b] }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim: dim as u8, coords: [0, 0] }
    }

    /// The unit vector `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut coords = [0, 0];
        coords[axis] = 1;
        Self { dim: dim as u8, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn sup_norm(&self) -> u64 {
        self.coords().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coords()
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        Self { dim: self.dim, coords: [-self.coords[0], -self.coords[1]] }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            coords: [self.coords[0] + other.coords[0], self.coords[1] + other.coords[1]],
        }
    }

    /// `m . t` with each `t_j` reduced mod 1 and the result reduced mod 1.
    pub fn phase_fraction(&self, t: &[f64]) -> f64 {
        let s: f64 = self
            .coords()
            .iter()
            .zip(t)
            .map(|(&m, &tj)| (m as f64) * tj.rem_euclid(1.0))
            .sum();
        s.rem_euclid(1.0)
    }

    /// `e^{2 pi i m.t}`.
    pub fn phase(&self, t: &[f64]) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(1.0, 0.0);
        }
        Complex64::from_polar(1.0, 2.0 * PI * self.phase_fraction(t))
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            1 => write!(f, "{}", self.coords[0]),
            _ => write!(f, "({},{})", self.coords[0], self.coords[1]),
        }
    }
}

/// The box `[-W, W]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    dim: usize,
    half: usize,
}

impl Window {
    pub fn new(dim: usize, half: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDim(dim));
        }
        Ok(Self { dim, half })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Half-width `W`.
    pub fn half(&self) -> usize {
        self.half
    }

    /// Number of indices per axis, `2W + 1`.
    pub fn side(&self) -> usize {
        2 * self.half + 1
    }

    /// Number of rows of the dense finite section.
    pub fn size(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    /// Largest admissible offset, `2W`.
    pub fn max_offset(&self) -> usize {
        2 * self.half
    }

    pub fn check_offset(&self, m: &LatticeIndex) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::WindowMismatch(format!(
                "offset {m} has dimension {}, window has {}",
                m.dim(),
                self.dim
            )));
        }
        if m.sup_norm() as usize > self.max_offset() {
            return Err(Error::IndexOutOfRange { offset: m.to_string(), max: self.max_offset() });
        }
        Ok(())
    }

    /// Linear (row-major) position of a lattice point inside the window.
    pub fn linear(&self, k: &[i64]) -> usize {
        let w = self.half as i64;
        k.iter().fold(0usize, |acc, &c| acc * self.side() + (c + w) as usize)
    }

    /// Lattice point at a linear position.
    pub fn point(&self, mut lin: usize) -> LatticeIndex {
        let w = self.half as i64;
        let mut c = [0i64; 2];
        for j in (0..self.dim).rev() {
            c[j] = (lin % self.side()) as i64 - w;
            lin /= self.side();
        }
        LatticeIndex { dim: self.dim as u8, coords: c }
    }

    /// Per-axis `(first row coordinate, count)` of the rows carried by diagonal `m`.
    fn diag_ranges(&self, m: &LatticeIndex) -> [(i64, usize); 2] {
        let w = self.half as i64;
        let mut out = [(0, 1); 2];
        for (j, &mj) in m.coords().iter().enumerate() {
            let lo = (-w).max(-w + mj);
            let hi = w.min(w + mj);
            out[j] = (lo, (hi - lo + 1).max(0) as usize);
        }
        out
    }

    /// Length of diagonal `m` inside the window.
    pub fn diag_len(&self, m: &LatticeIndex) -> usize {
        let r = self.diag_ranges(m);
        r[..self.dim].iter().map(|&(_, n)| n).product()
    }

    /// Calls `f(entry, row, col)` for every entry of diagonal `m`, with
    /// `row`/`col` the linear positions of `k` and `k - m`.
    pub fn for_each_position(&self, m: &LatticeIndex, mut f: impl FnMut(usize, usize, usize)) {
        let r = self.diag_ranges(m);
        let w = self.half as i64;
        let side = self.side() as i64;
        match self.dim {
            1 => {
                let (lo, n) = r[0];
                let mm = m.coords[0];
                for i in 0..n {
                    let k = lo + i as i64;
                    f(i, (k + w) as usize, (k - mm + w) as usize);
                }
            }
            _ => {
                let ((lo0, n0), (lo1, n1)) = (r[0], r[1]);
                let (m0, m1) = (m.coords[0], m.coords[1]);
                let mut e = 0;
                for i0 in 0..n0 as i64 {
                    let k0 = lo0 + i0;
                    for i1 in 0..n1 as i64 {
                        let k1 = lo1 + i1;
                        let row = (k0 + w) * side + (k1 + w);
                        let col = (k0 - m0 + w) * side + (k1 - m1 + w);
                        f(e, row as usize, col as usize);
                        e += 1;
                    }
                }
            }
        }
    }

    /// All offsets with `|m|_inf <= 2W`, in lexicographic order.
    pub fn all_offsets(&self) -> Vec<LatticeIndex> {
        let mo = self.max_offset() as i64;
        match self.dim {
            1 => (-mo..=mo).map(LatticeIndex::d1).collect(),
            _ => (-mo..=mo)
                .flat_map(|a| (-mo..=mo).map(move |b| LatticeIndex::d2(a, b)))
                .collect(),
        }
    }
}

/// One stored side diagonal with its cached sup-magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonal {
    entries: Vec<Complex64>,
    sup: f64,
}

impl Diagonal {
    fn new(entries: Vec<Complex64>) -> Self {
        // NaN propagates so that non-finite diagonals are never mistaken for zero
        let sup_of = |f: fn(&Complex64) -> f64| {
            entries.iter().map(f).fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
        };
        // a NaN anywhere makes the sum NaN, so the max itself can skip the check
        let (sq, total) = entries.iter().fold((0.0f64, 0.0f64), |(m, t), z| {
            let q = z.norm_sqr();
            (m.max(q), t + q)
        });
        let sq = if total.is_nan() { f64::NAN } else { sq };
        // squares overflow or underflow far from 1; fall back to hypot there
        let sup = if sq.is_finite() && sq > 1e-290 { sq.sqrt() } else { sup_of(|z| z.norm()) };
        Self { entries, sup }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `sup_k |A(k, k - m)|`, the operator norm of the side diagonal.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    fn is_zero(&self) -> bool {
        self.sup == 0.0
    }
}

/// A finite section of a matrix over `Z^d`, stored by side diagonals.
///
/// Immutable once built; every operation returns a new matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMatrix {
    window: Window,
    diagonals: BTreeMap<LatticeIndex, Diagonal>,
}

impl LatticeMatrix {
    pub fn zeros(dim: usize, half: usize) -> Result<Self> {
        Ok(Self { window: Window::new(dim, half)?, diagonals: BTreeMap::new() })
    }

    pub fn identity(dim: usize, half: usize) -> Result<Self> {
        Self::single_diagonal(dim, half, LatticeIndex::zero(dim), Complex64::new(1.0, 0.0))
    }

    /// The matrix whose only nonzero diagonal is `m`, filled with `value`.
    pub fn single_diagonal(dim: usize, half: usize, m: LatticeIndex, value: Complex64) -> Result<Self> {
        let window = Window::new(dim, half)?;
        window.check_offset(&m)?;
        let mut diagonals = BTreeMap::new();
        let d = Diagonal::new(vec![value; window.diag_len(&m)]);
        if !d.is_zero() {
            diagonals.insert(m, d);
        }
        Ok(Self { window, diagonals })
    }

    /// Builds the matrix `A(k, l) = f(k, l)` on the window.
    pub fn from_fn(dim: usize, half: usize, f: impl Fn(&LatticeIndex, &LatticeIndex) -> Complex64) -> Result<Self> {
        let window = Window::new(dim, half)?;
        let mut diagonals = BTreeMap::new();
        for m in window.all_offsets() {
            let mut entries = vec![Complex64::new(0.0, 0.0); window.diag_len(&m)];
            window.for_each_position(&m, |e, row, col| {
                entries[e] = f(&window.point(row), &window.point(col));
            });
            let d = Diagonal::new(entries);
            if !d.is_zero() {
                diagonals.insert(m, d);
            }
        }
        Ok(Self { window, diagonals })
    }

    /// Builds a matrix from explicit diagonals; lengths must match the window.
    pub fn from_diagonals(
        dim: usize,
        half: usize,
        diagonals: impl IntoIterator<Item = (LatticeIndex, Vec<Complex64>)>,
    ) -> Result<Self> {
        let window = Window::new(dim, half)?;
        let mut map = BTreeMap::new();
        for (m, entries) in diagonals {
            window.check_offset(&m)?;
            let expected = window.diag_len(&m);
            if entries.len() != expected {
                return Err(Error::InvalidParameter(format!(
                    "diagonal {m} has {} entries, expected {expected}",
                    entries.len()
                )));
            }
            if map.insert(m, Diagonal::new(entries)).is_some() {
                return Err(Error::InvalidParameter(format!("diagonal {m} given twice")));
            }
        }
        Ok(Self { window, diagonals: map })
    }

    /// Splits a dense finite section into diagonals, dropping all-zero ones.
    pub fn from_dense(dim: usize, half: usize, dense: &DMatrix<Complex64>) -> Result<Self> {
        let window = Window::new(dim, half)?;
        let n = window.size();
        if dense.nrows() != n || dense.ncols() != n {
            return Err(Error::WindowMismatch(format!(
                "dense matrix is {}x{}, window needs {n}x{n}",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let src = dense.as_slice();
        let mut diagonals = BTreeMap::new();
        for m in window.all_offsets() {
            let mut entries = vec![Complex64::new(0.0, 0.0); window.diag_len(&m)];
            window.for_each_position(&m, |e, row, col| entries[e] = src[row + col * n]);
            let d = Diagonal::new(entries);
            if !d.is_zero() {
                diagonals.insert(m, d);
            }
        }
        Ok(Self { window, diagonals })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.window.size();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for (m, d) in &self.diagonals {
            self.window.for_each_position(m, |e, row, col| out[row + col * n] = d.entries[e]);
        }
        DMatrix::from_vec(n, n, out)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim
    }

    pub fn half_width(&self) -> usize {
        self.window.half
    }

    /// Stored (nonzero) diagonals in offset order.
    pub fn diagonals(&self) -> impl Iterator<Item = (&LatticeIndex, &Diagonal)> {
        self.diagonals.iter()
    }

    pub fn diagonal(&self, m: &LatticeIndex) -> Option<&Diagonal> {
        self.diagonals.get(m)
    }

    pub fn num_diagonals(&self) -> usize {
        self.diagonals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.diagonals.is_empty()
    }

    /// Largest `|m|_inf` over stored diagonals plus one (strict convention);
    /// zero for the zero matrix.
    pub fn bandwidth(&self) -> usize {
        self.diagonals.keys().map(|m| m.sup_norm() as usize + 1).max().unwrap_or(0)
    }

    /// Entries `A(k, k - m)` of side diagonal `m`; zeros when absent.
    pub fn side_diagonal(&self, m: &LatticeIndex) -> Result<Vec<Complex64>> {
        self.window.check_offset(m)?;
        Ok(match self.diagonals.get(m) {
            Some(d) => d.entries.clone(),
            None => vec![Complex64::new(0.0, 0.0); self.window.diag_len(m)],
        })
    }

    /// Entry `A(k, l)`; zero outside the window.
    pub fn get(&self, k: &LatticeIndex, l: &LatticeIndex) -> Complex64 {
        let w = self.window.half as i64;
        let inside = |p: &LatticeIndex| p.coords().iter().all(|c| c.abs() <= w);
        if !inside(k) || !inside(l) {
            return Complex64::new(0.0, 0.0);
        }
        let m = k.add(&l.neg());
        let Some(d) = self.diagonals.get(&m) else {
            return Complex64::new(0.0, 0.0);
        };
        let mut found = Complex64::new(0.0, 0.0);
        let target = self.window.linear(k.coords());
        self.window.for_each_position(&m, |e, row, _| {
            if row == target {
                found = d.entries[e];
            }
        });
        found
    }

    /// Scales each diagonal `m` by `f(m)`; diagonals scaled to zero are dropped.
    pub fn map_diagonals(&self, f: impl Fn(&LatticeIndex) -> Complex64) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .filter_map(|(m, d)| {
                let s = f(m);
                if s == Complex64::new(0.0, 0.0) {
                    return None;
                }
                let nd = Diagonal::new(d.entries.iter().map(|z| z * s).collect());
                (!nd.is_zero()).then_some((*m, nd))
            })
            .collect();
        Self { window: self.window, diagonals }
    }

    /// Entrywise map `A(k, l) -> g(A(k, l))`; `g(0)` must be 0.
    pub fn map_entries(&self, g: impl Fn(Complex64) -> Complex64) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .map(|(m, d)| (*m, Diagonal::new(d.entries.iter().map(|&z| g(z)).collect())))
            .filter(|(_, d)| !d.is_zero())
            .collect();
        Self { window: self.window, diagonals }
    }

    /// The matrix `|A|` of entrywise magnitudes.
    pub fn abs(&self) -> Self {
        self.map_entries(|z| Complex64::new(z.norm(), 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_diagonals(|_| c)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.window != other.window {
            return Err(Error::WindowMismatch(format!(
                "{:?} vs {:?}",
                self.window, other.window
            )));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same(other)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut diagonals = BTreeMap::new();
        let keys: std::collections::BTreeSet<_> =
            self.diagonals.keys().chain(other.diagonals.keys()).copied().collect();
        for m in keys {
            let n = self.window.diag_len(&m);
            let a = self.diagonals.get(&m);
            let b = other.diagonals.get(&m);
            let entries = match (a, b) {
                (Some(a), Some(b)) => a.entries.iter().zip(&b.entries).map(|(x, y)| op(*x, *y)).collect(),
                (Some(a), None) => a.entries.iter().map(|x| op(*x, zero)).collect(),
                (None, Some(b)) => b.entries.iter().map(|y| op(zero, *y)).collect(),
                (None, None) => vec![zero; n],
            };
            let d = Diagonal::new(entries);
            if !d.is_zero() {
                diagonals.insert(m, d);
            }
        }
        Ok(Self { window: self.window, diagonals })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    /// Finite-section product `AB` restricted to the window.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let prod = dense::matmul(&self.to_dense(), &other.to_dense());
        Self::from_dense(self.dim(), self.half_width(), &prod)
    }

    /// Conjugate transpose: diagonal `m` of `A*` is the conjugate of diagonal `-m` of `A`.
    pub fn adjoint(&self) -> Self {
        let diagonals = self
            .diagonals
            .iter()
            .map(|(m, d)| (m.neg(), Diagonal::new(d.entries.iter().map(|z| z.conj()).collect())))
            .collect();
        Self { window: self.window, diagonals }
    }

    /// Retains the diagonals with `|m|_inf < n` (strict convention, so `n = 0` gives zero).
    pub fn band_truncate(&self, n: usize) -> Self {
        BandedScheme::new(n).apply(self)
    }

    /// Modulation group action `chi_t`: diagonal `m` scaled by `e^{2 pi i m.t}`.
    pub fn modulate(&self, t: &[f64]) -> Self {
        self.map_diagonals(|m| m.phase(t))
    }

    /// `Delta_t^k = (chi_t - id)^k`: diagonal `m` scaled by `(e^{2 pi i m.t} - 1)^k`.
    pub fn difference(&self, t: &[f64], order: u32) -> Self {
        self.map_diagonals(|m| difference_factor(m, t, order))
    }

    /// `delta^alpha`: diagonal `m` scaled by `prod_j (2 pi i m_j)^{alpha_j}`.
    pub fn derivation(&self, alpha: &[u32]) -> Self {
        self.map_diagonals(|m| derivation_factor(m, alpha))
    }

    /// Largest entrywise difference `max |A(k,l) - B(k,l)|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.diagonals.values().map(|d| d.sup).fold(0.0, f64::max))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.diagonals.values().map(|d| d.sup).fold(0.0, f64::max)
    }
}

/// `(e^{2 pi i m.t} - 1)^order`.
pub fn difference_factor(m: &LatticeIndex, t: &[f64], order: u32) -> Complex64 {
    if m.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    (m.phase(t) - 1.0).powu(order)
}

/// `prod_j (2 pi i m_j)^{alpha_j}`.
pub fn derivation_factor(m: &LatticeIndex, alpha: &[u32]) -> Complex64 {
    m.coords()
        .iter()
        .zip(alpha)
        .fold(Complex64::new(1.0, 0.0), |acc, (&mj, &a)| {
            acc * Complex64::new(0.0, 2.0 * PI * mj as f64).powu(a)
        })
}

/// The banded approximation scheme `T_N`: matrices supported on `|m|_inf < N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandedScheme {
    bandwidth: usize,
}

impl BandedScheme {
    pub fn new(bandwidth: usize) -> Self {
        Self { bandwidth }
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn contains(&self, m: &LatticeIndex) -> bool {
        (m.sup_norm() as usize) < self.bandwidth
    }

    pub fn apply(&self, a: &LatticeMatrix) -> LatticeMatrix {
        let diagonals = a
            .diagonals
            .iter()
            .filter(|(m, _)| self.contains(m))
            .map(|(m, d)| (*m, d.clone()))
            .collect();
        LatticeMatrix { window: a.window, diagonals }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_side_diagonals() {
        let id = LatticeMatrix::identity(1, 4).unwrap();
        assert!(id.side_diagonal(&LatticeIndex::d1(0)).unwrap().iter().all(|z| *z == c(1.0)));
        let off = id.side_diagonal(&LatticeIndex::d1(1)).unwrap();
        assert_eq!(off.len(), 8);
        assert!(off.iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn geometric_decay_side_diagonal() {
        let a = LatticeMatrix::from_fn(1, 4, |k, l| {
            c(2f64.powi(-((k.coords()[0] - l.coords()[0]).abs() as i32)))
        })
        .unwrap();
        let d = a.side_diagonal(&LatticeIndex::d1(2)).unwrap();
        assert_eq!(d.len(), 7);
        assert!(d.iter().all(|z| *z == c(0.25)));
    }

    #[test]
    fn side_diagonal_out_of_range() {
        let a = LatticeMatrix::identity(1, 3).unwrap();
        assert!(matches!(
            a.side_diagonal(&LatticeIndex::d1(7)),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(a.side_diagonal(&LatticeIndex::d1(-6)).is_ok());
    }

    #[test]
    fn two_dim_diagonal_lengths() {
        let w = Window::new(2, 3).unwrap();
        assert_eq!(w.diag_len(&LatticeIndex::d2(0, 0)), 49);
        assert_eq!(w.diag_len(&LatticeIndex::d2(2, -1)), 5 * 6);
        assert_eq!(w.diag_len(&LatticeIndex::d2(6, 6)), 1);
    }

    #[test]
    fn dense_round_trip_two_dim() {
        let a = LatticeMatrix::from_fn(2, 2, |k, l| {
            Complex64::new(
                (k.coords()[0] * 3 + l.coords()[1]) as f64,
                (k.coords()[1] - 2 * l.coords()[0]) as f64,
            )
        })
        .unwrap();
        let back = LatticeMatrix::from_dense(2, 2, &a.to_dense()).unwrap();
        assert_eq!(a, back);
        let k = LatticeIndex::d2(1, -2);
        let l = LatticeIndex::d2(-1, 0);
        assert_eq!(a.get(&k, &l), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn band_truncate_cases() {
        let a = LatticeMatrix::from_diagonals(
            1,
            5,
            [0i64, 1, 2].map(|m| {
                let m = LatticeIndex::d1(m);
                (m, vec![c(1.0); Window::new(1, 5).unwrap().diag_len(&m)])
            }),
        )
        .unwrap();
        assert!(a.band_truncate(0).is_zero());
        let t = a.band_truncate(2);
        let kept: Vec<_> = t.diagonals().map(|(m, _)| *m).collect();
        assert_eq!(kept, vec![LatticeIndex::d1(0), LatticeIndex::d1(1)]);
        // dense masking oracle
        let mut dense = a.to_dense();
        for i in 0..11 {
            for j in 0..11 {
                if (i as i64 - j as i64).abs() >= 2 {
                    dense[(i, j)] = c(0.0);
                }
            }
        }
        assert_eq!(t.to_dense(), dense);
        let id = LatticeMatrix::identity(1, 5).unwrap();
        assert_eq!(id.band_truncate(1), id);
    }

    #[test]
    fn single_diagonal_product() {
        let w = 6;
        let a = LatticeMatrix::single_diagonal(1, w, LatticeIndex::d1(1), c(1.0)).unwrap();
        let b = LatticeMatrix::single_diagonal(1, w, LatticeIndex::d1(2), c(1.0)).unwrap();
        let p = a.multiply(&b).unwrap();
        assert_eq!(p.num_diagonals(), 1);
        let d = p.side_diagonal(&LatticeIndex::d1(3)).unwrap();
        assert_eq!(d.len(), 2 * w + 1 - 3);
        assert!(d.iter().all(|z| (*z - c(1.0)).norm() < 1e-15));
        // naive dense oracle
        let (da, db) = (a.to_dense(), b.to_dense());
        let n = da.nrows();
        let mut naive = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                for q in 0..n {
                    naive[(i, j)] += da[(i, q)] * db[(q, j)];
                }
            }
        }
        assert!((p.to_dense() - naive).camax() < 1e-15);
    }

    #[test]
    fn identity_and_adjoint() {
        let a = LatticeMatrix::from_fn(1, 5, |k, l| {
            Complex64::new((k.coords()[0] - 2 * l.coords()[0]) as f64, k.coords()[0] as f64)
        })
        .unwrap();
        let id = LatticeMatrix::identity(1, 5).unwrap();
        assert!(id.multiply(&a).unwrap().max_abs_diff(&a).unwrap() < 1e-14);
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.adjoint().to_dense(), a.to_dense().adjoint());
    }

    #[test]
    fn window_mismatch_rejected() {
        let a = LatticeMatrix::identity(1, 3).unwrap();
        let b = LatticeMatrix::identity(1, 4).unwrap();
        assert!(matches!(a.multiply(&b), Err(Error::WindowMismatch(_))));
        assert!(matches!(a.add(&b), Err(Error::WindowMismatch(_))));
    }

    #[test]
    fn modulation_cases() {
        let a = LatticeMatrix::from_fn(1, 4, |k, l| c(1.0 + (k.coords()[0] - l.coords()[0]).abs() as f64)).unwrap();
        assert_eq!(a.modulate(&[0.0]), a);
        assert!(a.modulate(&[1.0]).max_abs_diff(&a).unwrap() < 1e-15);
        let s = LatticeMatrix::single_diagonal(1, 4, LatticeIndex::d1(1), c(1.0)).unwrap();
        let m = s.modulate(&[0.25]);
        for z in m.side_diagonal(&LatticeIndex::d1(1)).unwrap() {
            assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn difference_cases() {
        let a = LatticeMatrix::from_fn(1, 4, |k, l| c((k.coords()[0] + l.coords()[0]) as f64)).unwrap();
        assert!(a.difference(&[0.0], 2).is_zero());
        let diag = LatticeMatrix::identity(1, 4).unwrap();
        for t in [0.1, 0.37, 0.5] {
            for k in 1..4 {
                assert!(diag.difference(&[t], k).is_zero());
            }
        }
        let s = LatticeMatrix::single_diagonal(1, 4, LatticeIndex::d1(1), c(1.0)).unwrap();
        for z in s.difference(&[0.5], 1).side_diagonal(&LatticeIndex::d1(1)).unwrap() {
            assert_abs_diff_eq!(z.re, -2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivation_cases() {
        let a = LatticeMatrix::from_fn(1, 4, |k, l| c((k.coords()[0] * l.coords()[0]) as f64 + 0.5)).unwrap();
        assert_eq!(a.derivation(&[0]), a);
        assert!(LatticeMatrix::identity(1, 4).unwrap().derivation(&[1]).is_zero());
        let s = LatticeMatrix::single_diagonal(1, 4, LatticeIndex::d1(2), c(1.0)).unwrap();
        // d/dt e^{2 pi i 2 t} at t = 0 is 4 pi i
        for z in s.derivation(&[1]).side_diagonal(&LatticeIndex::d1(2)).unwrap() {
            assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(z.im, 4.0 * PI, epsilon = 1e-14);
        }
    }
}
