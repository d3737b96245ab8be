//! Integration engines: adaptive 2D quadrature over regions with integrable
//! point singularities, contour trapezoid rules and Cesaro means.

mod adaptive;
mod contour;
pub mod gauss;
mod patches;

pub use adaptive::{
    integrate2d, integrate2d_with, plane_tail_bound, Decay, FixedRule, QuadOptions,
    QuadratureResult, Singularity,
};
pub use contour::{contour_fourier, Contour};

use crate::{Error, Result, C64};

/// `y_n = (x_0 + ... + x_n) / (n + 1)`.
pub fn cesaro_means(x: &[C64]) -> Vec<C64> {
    let mut s = C64::new(0.0, 0.0);
    x.iter()
        .enumerate()
        .map(|(n, &v)| {
            s += v;
            s / (n + 1) as f64
        })
        .collect()
}

/// Adaptive Gauss-Legendre on `[a, b]`: a panel is accepted when the 10-point
/// value agrees with the sum over its halves.
pub fn integrate1d<F>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    fn go<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let l: f64 = gauss::integrate(f, a, m, 10);
        let r: f64 = gauss::integrate(f, m, b, 10);
        let err = (l + r - whole).abs();
        if err <= tol.max(16.0 * f64::EPSILON * (l + r).abs()) || depth >= 40 {
            return (l + r, err);
        }
        let (lv, le) = go(f, a, m, l, tol / 2.0, depth + 1);
        let (rv, re) = go(f, m, b, r, tol / 2.0, depth + 1);
        (lv + rv, le + re)
    }
    let whole: f64 = gauss::integrate(&f, a, b, 10);
    let (v, e) = go(&f, a, b, whole, tol, 0);
    if !v.is_finite() {
        return Err(Error::NonFinite("1d integrand".into()));
    }
    if e > tol.max(64.0 * f64::EPSILON * v.abs()) {
        return Err(Error::QuadratureNoConvergence { value_re: v, value_im: 0.0, error_estimate: e, cells: 0 });
    }
    Ok((v, e))
}

#[cfg(test)]
mod tests;
