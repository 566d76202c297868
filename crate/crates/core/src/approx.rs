//! Banded approximation errors and approximation-space norms.
//!
//! The approximation scheme is `T_N = { A : A^(m) = 0 for |m|_inf >= N }`.
//! `E_N(A)` is evaluated as `|A - band_truncate(A, N)|`, which is the true
//! best-approximation error for diagonal-separable solid norms (Jaffard,
//! `C^p_r` and weighted variants) and an upper bound otherwise; see
//! [`truncation_is_best`]. Non-integer bandwidths use `E_sigma = E_ceil(sigma)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, LatticeMatrix};
use crate::norms::{parse_params, split_kind, Exponent, MatrixNorm, NormSpec};
use crate::smoothness::{besov_norm_solid_lp, split_base};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Whether truncation realises the infimum over `T_N` for this norm.
pub fn truncation_is_best(base: &NormSpec) -> bool {
    match base {
        NormSpec::Jaffard { .. } | NormSpec::CpDiag { .. } => true,
        NormSpec::Weighted { base, .. } => truncation_is_best(base),
        NormSpec::OperatorL2 | NormSpec::Schur { .. } => false,
    }
}

/// `|A - T_N A|` for any norm.
pub fn approx_error_with(a: &LatticeMatrix, n: usize, base: &dyn MatrixNorm) -> f64 {
    base.norm_scaled(a, &|m: &LatticeIndex| if (m.sup_norm() as usize) < n { ZERO } else { ONE })
}

/// `E_N(A)` under a base norm.
pub fn approx_error(a: &LatticeMatrix, n: usize, base: &NormSpec) -> f64 {
    approx_error_with(a, n, base)
}

/// `E_sigma = E_ceil(sigma)` for real `sigma >= 0`.
pub fn approx_error_real(a: &LatticeMatrix, sigma: f64, base: &NormSpec) -> Result<f64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("bandwidth sigma = {sigma} must be finite and >= 0")));
    }
    Ok(approx_error(a, sigma.ceil() as usize, base))
}

/// `E_0, ..., E_{2W}`. All later errors vanish.
pub fn approx_errors(a: &LatticeMatrix, base: &dyn MatrixNorm) -> Vec<f64> {
    (0..=a.window().max_offset()).map(|n| approx_error_with(a, n, base)).collect()
}

/// Form of an approximation-space norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxForm {
    /// `(sum_{k=0}^{2W} E_k^p (k+1)^{rp} / (k+1))^{1/p}`.
    IntegralSum,
    /// `(E_0^p + sum_{j: 2^j <= 2W} (2^{jr} E_{2^j})^p)^{1/p}`.
    Dyadic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxSpaceSpec {
    pub base: NormSpec,
    pub r: f64,
    pub p: Exponent,
    pub form: ApproxForm,
}

impl ApproxSpaceSpec {
    pub fn new(base: NormSpec, r: f64, p: Exponent, form: ApproxForm) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("approximation order r = {r} must be positive")));
        }
        base.validate()?;
        Ok(Self { base, r, p, form })
    }
}

impl fmt::Display for ApproxSpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.base.to_string();
        if base.contains(',') {
            write!(f, "approx:base=[{base}]")?;
        } else {
            write!(f, "approx:base={base}")?;
        }
        let form = match self.form {
            ApproxForm::IntegralSum => "integral",
            ApproxForm::Dyadic => "dyadic",
        };
        write!(f, ",r={},p={},form={form}", self.r, self.p)
    }
}

/// `approx:base=<norm>,r=<r>,p=<p>[,form=integral|dyadic]`.
impl FromStr for ApproxSpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = split_kind(s.trim());
        if kind != "approx" {
            return Err(Error::Parse(format!("expected `approx:...`, got `{s}`")));
        }
        let body = rest
            .trim()
            .strip_prefix("base=")
            .ok_or_else(|| Error::Parse("approx spec must start with `base=`".into()))?;
        let (base_str, tail) = split_base(body)?;
        let base: NormSpec = base_str.parse()?;
        let pr = parse_params(tail, &["r", "p", "form"])?;
        let r = pr.get_f64("r")?.ok_or_else(|| Error::Parse("approx spec needs `r`".into()))?;
        let p = pr.get_exponent("p")?.ok_or_else(|| Error::Parse("approx spec needs `p`".into()))?;
        let form = match pr.get("form").unwrap_or("integral") {
            "integral" => ApproxForm::IntegralSum,
            "dyadic" => ApproxForm::Dyadic,
            other => return Err(Error::Parse(format!("unknown approximation form `{other}`"))),
        };
        Self::new(base, r, p, form)
    }
}

/// Both forms of the approximation-space norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproxNorms {
    pub integral_sum: f64,
    pub dyadic: f64,
}

impl ApproxNorms {
    pub fn get(&self, form: ApproxForm) -> f64 {
        match form {
            ApproxForm::IntegralSum => self.integral_sum,
            ApproxForm::Dyadic => self.dyadic,
        }
    }
}

/// Approximation-space norms from a precomputed error sequence `E_0, E_1, ...`.
pub fn approx_norms_from_errors(errors: &[f64], r: f64, p: Exponent) -> ApproxNorms {
    let integral_sum = p.norm_of(
        errors
            .iter()
            .enumerate()
            .map(|(k, e)| e * ((k + 1) as f64).powf(r - p.reciprocal())),
    );
    let e0 = errors.first().copied().unwrap_or(0.0);
    let dyadic = p.norm_of(
        std::iter::once(e0).chain(
            (0..)
                .map(|j: u32| 1usize << j)
                .take_while(|n| *n < errors.len())
                .enumerate()
                .map(|(j, n)| 2f64.powf(j as f64 * r) * errors[n]),
        ),
    );
    ApproxNorms { integral_sum, dyadic }
}

/// Approximation-space norm of `A` in both forms.
pub fn approx_space_norm(a: &LatticeMatrix, spec: &ApproxSpaceSpec) -> ApproxNorms {
    approx_norms_from_errors(&approx_errors(a, &spec.base), spec.r, spec.p)
}

/// Integral-sum approximation norm over the solid Littlewood-Paley Besov norm.
pub fn jackson_bernstein_ratio(a: &LatticeMatrix, base: &NormSpec, r: f64, p: Exponent) -> Result<f64> {
    if a.is_zero() {
        return Err(Error::Degenerate("ratio of norms of the zero matrix".into()));
    }
    let spec = ApproxSpaceSpec::new(base.clone(), r, p, ApproxForm::IntegralSum)?;
    let besov = besov_norm_solid_lp(a, base, r, p)?;
    Ok(approx_space_norm(a, &spec).integral_sum / besov)
}

/// Values compared by [`cpr_shift_identity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CprShiftReport {
    /// Approximation norm with smoothness `s` over `C^p_r`.
    pub lhs: f64,
    /// Approximation norm with smoothness `r + s` over `C^p_0`.
    pub rhs: f64,
    pub ratio: f64,
    /// `C^p_{r+s}` norm, only when `p = q`.
    pub direct: Option<f64>,
    /// `lhs / direct`.
    pub ratio_direct: Option<f64>,
}

/// Compares the approximation norms `(C^p_r, s, q)` and `(C^p_0, r + s, q)`, and
/// for `p = q` the plain `C^p_{r+s}` norm.
pub fn cpr_shift_identity_check(a: &LatticeMatrix, p: Exponent, q: Exponent, r: f64, s: f64) -> Result<CprShiftReport> {
    let left = ApproxSpaceSpec::new(NormSpec::cpr(p, r), s, q, ApproxForm::IntegralSum)?;
    let right = ApproxSpaceSpec::new(NormSpec::cpr(p, 0.0), r + s, q, ApproxForm::IntegralSum)?;
    let lhs = approx_space_norm(a, &left).integral_sum;
    let rhs = approx_space_norm(a, &right).integral_sum;
    let direct = (p == q).then(|| NormSpec::cpr(p, r + s).norm(a));
    Ok(CprShiftReport {
        lhs,
        rhs,
        ratio: lhs / rhs,
        direct,
        ratio_direct: direct.map(|d| lhs / d),
    })
}
