//! Numerical laboratory for quasiconformal deformations of planar Riemann surfaces
//! carrying a `Z` action.
//!
//! The crate builds the explicit objects that appear in the extremality and
//! geodesic constructions for `C \ Z`: trivial Beltrami families on strips,
//! annuli and slit disks, weighted Teichmueller-type coefficients on the
//! period-3 cells, cyclic Poincare series and Hamilton sequences, and the
//! glued geodesic families together with their pairing-based separation and
//! parameter recovery. Every identity is checked against an independent
//! numerical route (quadrature, contour rules, a spectral Beltrami solver or
//! ODE continuation of the elliptic covering).
//!
//! Data-parallel inner loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and falls back to sequential iteration
//! otherwise.

pub mod beltsolve;
pub mod domains;
pub mod elliptic;
pub mod error;
pub mod extremal;
pub mod fields;
pub mod geodesics;
mod ode;
pub mod par;
pub mod qdiff;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

/// `Complex64::new` without the noise.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
