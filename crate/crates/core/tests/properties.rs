use odd_core::approx::{approx_error, approx_errors, ApproxForm, ApproxSpaceSpec};
use odd_core::bessel::{bessel_convolve, bessel_factor, bessel_norm, HypersingularQuadrature};
use odd_core::io::{matrix_from_json, matrix_to_json};
use odd_core::smoothness::{AnyNorm, BesovMethod, BesovSpec};
use odd_core::{Complex64, Exponent, LatticeIndex, LatticeMatrix, MatrixNorm, NormSpec, WeightSpec};
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = Complex64> {
    prop_oneof![
        1 => Just(Complex64::new(0.0, 0.0)),
        4 => (-4.0..4.0f64, -4.0..4.0f64).prop_map(|(re, im)| Complex64::new(re, im)),
    ]
}

/// Random finite section, `d = 1` with `W <= 6` or `d = 2` with `W <= 2`.
fn matrix() -> impl Strategy<Value = LatticeMatrix> {
    (1usize..=2)
        .prop_flat_map(|dim| (Just(dim), if dim == 1 { 1usize..=6 } else { 1usize..=2 }))
        .prop_flat_map(|(dim, half)| {
            let n = (2 * half + 1).pow(dim as u32);
            (Just(dim), Just(half), proptest::collection::vec(entry(), n * n))
        })
        .prop_map(|(dim, half, vals)| {
            let n = (2 * half + 1).pow(dim as u32);
            let dense = nalgebra::DMatrix::from_vec(n, n, vals);
            LatticeMatrix::from_dense(dim, half, &dense).unwrap()
        })
}

fn pair() -> impl Strategy<Value = (LatticeMatrix, LatticeMatrix)> {
    matrix().prop_flat_map(|a| {
        let (dim, half) = (a.dim(), a.half_width());
        let n = (2 * half + 1).pow(dim as u32);
        (Just(a), proptest::collection::vec(entry(), n * n)).prop_map(move |(a, vals)| {
            let b = LatticeMatrix::from_dense(dim, half, &nalgebra::DMatrix::from_vec(n, n, vals)).unwrap();
            (a, b)
        })
    })
}

fn t_for(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, dim)
}

fn solid_norms() -> Vec<AnyNorm> {
    [
        "jaffard:r=1.5",
        "schur:p=1,r=0",
        "schur:p=3,r=1",
        "cpr:p=2,r=0.5",
        "cpr:p=inf,r=1",
        "cpr:p=1.5,r=1,literal=true",
        "w[bessel:r=0.7]schur:p=inf,r=0",
        "besov:base=jaffard:r=0,r=0.5,p=inf,method=modulus,grid=16",
        "besov:base=[schur:p=1,r=0],r=1.2,p=2,method=solidlp",
        "besov:base=[cpr:p=1,r=0],r=0.8,p=1,method=philp",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

fn scale_bound(a: &LatticeMatrix) -> f64 {
    a.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law(a in matrix(), s in t_for(2), t in t_for(2)) {
        let (s, t) = (&s[..a.dim()], &t[..a.dim()]);
        let st: Vec<f64> = s.iter().zip(t).map(|(x, y)| x + y).collect();
        let diff = a.modulate(s).modulate(t).max_abs_diff(&a.modulate(&st)).unwrap();
        prop_assert!(diff <= 1e-12 * scale_bound(&a), "{diff}");
    }

    #[test]
    fn binomial_expansion(a in matrix(), t in t_for(2), k in 1u32..5) {
        let t = &t[..a.dim()];
        let mut sum = LatticeMatrix::zeros(a.dim(), a.half_width()).unwrap();
        let mut c = 1.0;
        for j in 0..=k {
            let jt: Vec<f64> = t.iter().map(|x| j as f64 * x).collect();
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            sum = sum.add(&a.modulate(&jt).scale(Complex64::new(sign * c, 0.0))).unwrap();
            c = c * (k - j) as f64 / (j + 1) as f64;
        }
        let diff = a.difference(t, k).max_abs_diff(&sum).unwrap();
        prop_assert!(diff <= 1e-13 * 2f64.powi(k as i32) * scale_bound(&a));
    }

    #[test]
    fn leibniz_rule((a, b) in pair(), t in t_for(2)) {
        let t = &t[..a.dim()];
        let lhs = a.multiply(&b).unwrap().difference(t, 1);
        let rhs = a.modulate(t).multiply(&b.difference(t, 1)).unwrap()
            .add(&a.difference(t, 1).multiply(&b).unwrap()).unwrap();
        let n = (2 * a.half_width() + 1).pow(a.dim() as u32) as f64;
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-13 * n * scale_bound(&a) * scale_bound(&b));
    }

    #[test]
    fn solid_norms_are_monotone((a, b) in pair(), t in t_for(2)) {
        // |small| <= |big| entrywise, with phases taken from the other matrix
        let big = a.map_entries(|z| z * 1.5);
        let small = LatticeMatrix::from_fn(a.dim(), a.half_width(), |k, l| {
            let x = a.get(k, l).norm();
            let y = b.get(k, l);
            if y.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { y / y.norm() * x * 0.9 }
        }).unwrap();
        let t = &t[..a.dim()];
        for n in solid_norms() {
            prop_assert!(n.norm(&small) <= n.norm(&big), "{n}");
            let na = n.norm(&a);
            prop_assert!((n.norm(&a.abs()) - na).abs() <= 1e-12 * na, "{n}");
            prop_assert!((n.norm(&a.modulate(t)) - na).abs() <= 1e-12 * na, "{n}");
        }
    }

    #[test]
    fn bernstein_for_banded(a in matrix(), n in 1usize..5) {
        let tn = a.band_truncate(n);
        prop_assume!(!tn.is_zero());
        for spec in solid_norms() {
            for axis in 0..a.dim() {
                let mut alpha = vec![0u32; a.dim()];
                alpha[axis] = 1;
                let lhs = spec.norm(&tn.derivation(&alpha));
                prop_assert!(lhs <= 2.0 * std::f64::consts::PI * n as f64 * spec.norm(&tn) * (1.0 + 1e-12), "{spec}");
            }
        }
    }

    #[test]
    fn approximation_errors(a in matrix(), r in 0.0..3.0f64) {
        let base = NormSpec::jaffard(r);
        let e = approx_errors(&a, &base);
        prop_assert!(e.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(approx_error(&a, a.bandwidth(), &base), 0.0);
    }

    #[test]
    fn truncation_is_optimal((a, b) in pair(), n in 0usize..4) {
        let tn = a.band_truncate(n);
        let other = tn.add(&b.band_truncate(n)).unwrap();
        for spec in ["jaffard:r=1", "cpr:p=2,r=0.5", "cpr:p=1,r=0"] {
            let base: NormSpec = spec.parse().unwrap();
            let best = base.norm(&a.sub(&tn).unwrap());
            prop_assert!(best <= base.norm(&a.sub(&other).unwrap()), "{spec}");
        }
    }

    #[test]
    fn banded_products((a, b) in pair(), n in 1usize..4, m in 1usize..4) {
        let p = a.band_truncate(n).multiply(&b.band_truncate(m)).unwrap();
        prop_assert!(p.bandwidth() < n + m);
    }

    #[test]
    fn bessel_weighting_inverts_convolution(a in matrix(), r in 0.05..1.99f64) {
        let g = bessel_convolve(&a, r).unwrap();
        for base in [NormSpec::jaffard(0.0), NormSpec::schur(Exponent::Finite(2.0), 1.0)] {
            let n = base.norm(&a);
            prop_assert!((bessel_norm(&g, r, &base).unwrap() - n).abs() <= 1e-12 * n);
        }
    }

    #[test]
    fn bessel_semigroup(m in -200i64..200, r in 0.0..3.0f64, s in 0.0..3.0f64) {
        let m = LatticeIndex::new(&[m]).unwrap();
        let prod = bessel_factor(&m, r) * bessel_factor(&m, s);
        let direct = bessel_factor(&m, r + s);
        prop_assert!((prod - direct).abs() <= 1e-13 * direct);
    }

    #[test]
    fn json_round_trip_is_exact(a in matrix()) {
        let back = matrix_from_json(&matrix_to_json(&a).unwrap()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn norm_grammar_round_trip(spec in norm_spec()) {
        let printed = spec.to_string();
        let back: NormSpec = printed.parse().unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn besov_grammar_round_trip(spec in besov_spec()) {
        let printed = spec.to_string();
        let back: BesovSpec = printed.parse().unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn approx_grammar_round_trip(base in norm_spec(), r in 0.01..4.0f64, p in exponent(), dyadic in any::<bool>()) {
        let form = if dyadic { ApproxForm::Dyadic } else { ApproxForm::IntegralSum };
        let spec = ApproxSpaceSpec::new(base, r, p, form).unwrap();
        let back: ApproxSpaceSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(back, spec);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hypersingular_multiplier_symmetry(m in 1i64..40) {
        let q = HypersingularQuadrature::new(1, 0.5).unwrap();
        let plus = q.multipliers(&LatticeIndex::new(&[m]).unwrap(), 8).unwrap();
        let minus = q.multipliers(&LatticeIndex::new(&[-m]).unwrap(), 8).unwrap();
        prop_assert_eq!(&plus, &minus);
        prop_assert!(plus.iter().all(|x| *x <= 0.0));
        prop_assert!(plus.windows(2).all(|w| w[1] <= w[0]));
    }
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::Infinite),
        Just(Exponent::Finite(1.0)),
        (1.0..8.0f64).prop_map(Exponent::Finite),
    ]
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.0..5.0f64]
}

fn solid_base() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        order().prop_map(NormSpec::jaffard),
        (exponent(), order()).prop_map(|(p, r)| NormSpec::schur(p, r)),
        (exponent(), order(), any::<bool>()).prop_map(|(p, r, literal)| NormSpec::CpDiag { p, r, literal }),
    ]
}

fn norm_spec() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        Just(NormSpec::OperatorL2),
        solid_base(),
        (solid_base(), order(), any::<bool>()).prop_map(|(b, r, bessel)| {
            let w = if bessel { WeightSpec::Bessel(r) } else { WeightSpec::Polynomial(r) };
            NormSpec::weighted(b, w).unwrap()
        }),
    ]
}

fn besov_spec() -> impl Strategy<Value = BesovSpec> {
    (solid_base(), 0.01..4.0f64, exponent(), 0u32..3, 0usize..3, any::<bool>()).prop_map(|(base, r, p, extra, method, tuned)| {
        let method = match method {
            0 if tuned => BesovMethod::ModulusDyadic { levels: Some((1, 7)), grid: Some(24) },
            0 => BesovMethod::ModulusDyadic { levels: None, grid: None },
            1 => BesovMethod::SolidLp,
            _ => BesovMethod::PhiLp,
        };
        BesovSpec::with_order(base, r, p, r.floor() as u32 + 1 + extra, method).unwrap()
    })
}
