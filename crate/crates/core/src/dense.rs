//! Dense kernels on finite sections: products, spectral norms, inversion.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Rows above which the spectral norm switches from a dense Hermitian
/// eigensolve to power iteration.
pub const DENSE_SPECTRAL_LIMIT: usize = 2048;

/// `C += alpha X Y` for contiguous column-major real matrices.
fn dgemm_acc(m: usize, k: usize, n: usize, alpha: f64, x: &[f64], y: &[f64], c: &mut [f64]) {
    // SAFETY: slices hold m*k, k*n and m*n elements, column-major with unit row stride.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            x.as_ptr(),
            1,
            m as isize,
            y.as_ptr(),
            1,
            k as isize,
            1.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

/// Real and imaginary parts; the imaginary part is `None` when identically zero.
fn split(a: &DMatrix<Complex64>) -> (Vec<f64>, Option<Vec<f64>>) {
    let s = a.as_slice();
    let re = s.iter().map(|z| z.re).collect();
    let im = s.iter().any(|z| z.im != 0.0).then(|| s.iter().map(|z| z.im).collect());
    (re, im)
}

/// `A B` for column-major complex matrices, as real products that skip
/// vanishing imaginary parts.
pub fn matmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions must agree");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    if m == 0 || n == 0 || k == 0 {
        return DMatrix::zeros(m, n);
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let mut re = vec![0.0; m * n];
    let mut im = vec![0.0; m * n];
    dgemm_acc(m, k, n, 1.0, &ar, &br, &mut re);
    if let Some(ai) = &ai {
        dgemm_acc(m, k, n, 1.0, ai, &br, &mut im);
    }
    if let Some(bi) = &bi {
        dgemm_acc(m, k, n, 1.0, &ar, bi, &mut im);
        if let Some(ai) = &ai {
            dgemm_acc(m, k, n, -1.0, ai, bi, &mut re);
        }
    }
    let out: Vec<Complex64> = re.iter().zip(&im).map(|(&x, &y)| Complex64::new(x, y)).collect();
    DMatrix::from_vec(m, n, out)
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.is_empty() || a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    if a.nrows().max(a.ncols()) <= DENSE_SPECTRAL_LIMIT {
        let gram = matmul(&a.adjoint(), a);
        let lmax = gram
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(0.0f64, f64::max);
        lmax.max(0.0).sqrt()
    } else {
        power_iteration(a)
    }
}

/// Power iteration on `A* A`; used for windows too large for a dense eigensolve.
fn power_iteration(a: &DMatrix<Complex64>) -> f64 {
    let n = a.ncols();
    // Deterministic start with all components excited.
    let mut x = nalgebra::DVector::<Complex64>::from_fn(n, |i, _| {
        Complex64::new(1.0 + (i as f64 * 0.618_033_988_75).fract(), 0.0)
    });
    x /= Complex64::new(x.norm(), 0.0);
    let mut sigma = 0.0;
    for _ in 0..10_000 {
        let y = a * &x;
        let z = a.adjoint() * &y;
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        let next = nz.sqrt();
        x = z / Complex64::new(nz, 0.0);
        if (next - sigma).abs() <= 1e-13 * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Inverse via LU; `None` if a pivot vanishes.
pub fn inverse(a: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    a.clone().lu().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_naive() {
        let a = DMatrix::from_fn(7, 5, |i, j| Complex64::new(i as f64 - j as f64, (i * j) as f64 * 0.1));
        let b = DMatrix::from_fn(5, 3, |i, j| Complex64::new((i + 2 * j) as f64, -(i as f64)));
        let c = matmul(&a, &b);
        let naive = &a * &b;
        assert!((c - naive).camax() < 1e-12);
        // real operands on either side
        let ra = a.map(|z| Complex64::new(z.re, 0.0));
        let rb = b.map(|z| Complex64::new(z.re, 0.0));
        for (x, y) in [(&ra, &b), (&a, &rb), (&ra, &rb)] {
            assert!((matmul(x, y) - x * y).camax() < 1e-12);
        }
        assert!(matmul(&ra, &rb).iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let a = DMatrix::from_fn(20, 20, |i, j| {
            Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + j) % 5) as f64)
        });
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        assert!((spectral_norm(&a) - smax).abs() <= 1e-10 * smax);
        assert!((power_iteration(&a) - smax).abs() <= 1e-8 * smax);
    }
}
