//! Numerical toolkit for matrices with off-diagonal decay.
//!
//! Matrices live on finite windows `[-W, W]^d` of the lattice `Z^d` and are
//! stored by side diagonals. On top of that representation the crate provides
//! the solid algebra norms (Jaffard, Schur, `C^p_r`, weighted variants), the
//! operator norm on `l^2`, Besov norms under the modulation group in three
//! computable forms, banded approximation errors and approximation-space
//! norms, Bessel-potential norms with a hypersingular-integral evaluator, and
//! finite-section inversion experiments probing inverse-closedness.

pub mod approx;
pub mod bessel;
pub mod dense;
pub mod error;
pub mod io;
pub mod lab;
pub mod lattice;
pub mod norms;
pub mod quadrature;
pub mod smoothness;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{BandedScheme, LatticeIndex, LatticeMatrix, Window};
pub use norms::{Exponent, MatrixNorm, NormSpec, WeightSpec};
pub use num_complex::Complex64;
