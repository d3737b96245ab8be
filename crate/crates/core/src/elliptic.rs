//! The covering of the slit disk `D \ [-t, t]` by the strip `0 < Im ζ < R`.
//!
//! Normalisation: `ρ(0) = 1`, `ρ(ζ + 2π) = ρ(ζ)`, `ρ(-conj ζ) = conj ρ(ζ)`,
//! the real axis goes to the unit circle and `Im ζ = R` onto the slit. With
//! these choices `ρ` solves
//!
//! `(ρ')² = C² (ρ² - t²)(ρ² - 1/t²)`, `C = 2 t K(t²) / π`,
//!
//! and the matched height is `R(t) = (π/4) K(sqrt(1 - t⁴)) / K(t²)`, where `K`
//! is the complete elliptic integral of the first kind in modulus form.
//! Values are obtained by continuing the second-order form of the equation
//! along axis-parallel paths, so no square-root branch has to be tracked.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ode::Dopri;
use crate::quadrature::{contour_fourier, Contour};
use crate::{c64, Error, Result, C64};

/// Tolerance on the agreement between the two modulus computations.
pub const MODULUS_CROSS_CHECK_TOL: f64 = 1e-4;

/// `K(k) = ∫_0^{π/2} dθ / sqrt(1 - k² sin² θ)` by the arithmetic-geometric mean.
pub fn complete_k(k: f64) -> f64 {
    PI / (2.0 * agm(1.0, (1.0 - k * k).sqrt()))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// Strip height matched to the slit half-length `t`.
pub fn height_of_t(t: f64) -> Result<f64> {
    check_t(t)?;
    let t2 = t * t;
    // K(k') / K(k) with k = t², written through the AGM so that thin slits
    // keep full precision.
    Ok(0.25 * PI * agm(1.0, (1.0 - t2 * t2).sqrt()) / agm(1.0, t2))
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("slit half-length must lie in (0, 1), got {t}")))
    }
}

/// Inverse of [`height_of_t`] by bisection, validated against the
/// particular-solutions modulus.
pub fn t_of_r(height: f64) -> Result<f64> {
    let t = t_of_r_unchecked(height)?;
    let other = modulus_by_particular_solutions(t)?;
    if (other - height).abs() > MODULUS_CROSS_CHECK_TOL {
        return Err(Error::CrossCheck(format!(
            "slit modulus disagreement at t = {t}: elliptic {height}, particular solutions {other}"
        )));
    }
    Ok(t)
}

fn t_of_r_unchecked(height: f64) -> Result<f64> {
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::invalid(format!("strip height must be positive, got {height}")));
    }
    // R(t) decreases from +inf to 0 on (0, 1); bisect in log t.
    let (mut lo, mut hi) = (-700.0f64, 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let t = mid.exp();
        if t >= 1.0 {
            hi = mid;
            continue;
        }
        if height_of_t(t)? > height {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let t = (0.5 * (lo + hi)).exp();
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::NoConvergence(format!("no slit half-length for height {height}")));
    }
    Ok(t)
}

/// Modulus of the slit disk computed without elliptic integrals.
///
/// The Joukowski map `z = (t/2)(u + 1/u)` takes `|u| > 1` onto the plane minus
/// the slit; the harmonic measure of the outer circle becomes
/// `a ln|u| + Σ b_n (r^{2n} - r^{-2n}) cos 2nθ`, fitted to the value 1 on the
/// image of the unit circle. The flux through the slit is `2π a`, so the
/// matched strip height is `1/a`.
pub fn modulus_by_particular_solutions(t: f64) -> Result<f64> {
    check_t(t)?;
    let mut last = None;
    for terms in [20, 40, 80, 120] {
        let (height, residual) = particular_solutions_fit(t, terms)?;
        if residual < 1e-7 {
            return Ok(height);
        }
        last = Some(residual);
    }
    Err(Error::NoConvergence(format!(
        "particular-solutions fit residual {:e} at t = {t}",
        last.unwrap_or(f64::NAN)
    )))
}

fn particular_solutions_fit(t: f64, terms: usize) -> Result<(f64, f64)> {
    let samples = 4 * terms;
    let radius = |th: f64| {
        let s = 4.0 / (t * t) - 2.0 * (2.0 * th).cos();
        (0.5 * (s + (s * s - 4.0).sqrt())).sqrt()
    };
    let rmax = radius(0.5 * PI);
    let mut a = DMatrix::<f64>::zeros(samples, terms + 1);
    let rhs = DVector::<f64>::from_element(samples, 1.0);
    for i in 0..samples {
        let th = 0.5 * PI * (i as f64 + 0.5) / samples as f64;
        let r = radius(th);
        a[(i, 0)] = r.ln();
        for n in 1..=terms {
            let e = 2.0 * n as f64;
            a[(i, n)] = ((r / rmax).powf(e) - (r * rmax).powf(-e)) * (e * th).cos();
        }
    }
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&rhs, 1e-15)
        .map_err(|e| Error::NoConvergence(format!("modulus least squares: {e}")))?;
    let residual = (&a * &x - &rhs).amax();
    if !(x[0] > 0.0) {
        return Err(Error::NoConvergence(format!("degenerate particular-solutions fit at t = {t}")));
    }
    Ok((1.0 / x[0], residual))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticCoverData {
    t: f64,
    height: f64,
    scale: f64,
    /// Gauss-Chebyshev nodes used by the slit integral.
    pub slit_nodes: usize,
    /// Residual accepted by the Newton polish of the inverse.
    pub newton_tol: f64,
}

impl EllipticCoverData {
    pub fn new(t: f64) -> Result<Self> {
        let height = height_of_t(t)?;
        Ok(EllipticCoverData {
            t,
            height,
            scale: 2.0 * t * complete_k(t * t) / PI,
            slit_nodes: 64,
            newton_tol: 1e-10,
        })
    }

    /// Data for a given strip height, with the modulus cross-check.
    pub fn from_height(height: f64) -> Result<Self> {
        Self::new(t_of_r(height)?)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// The constant `C` in the differential equation.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `(x² - t²)(x² - 1/t²)`.
    pub fn radicand(&self, x: f64) -> f64 {
        (x * x - self.t * self.t) * (x * x - 1.0 / (self.t * self.t))
    }

    fn rhs_p(&self, r: C64) -> C64 {
        let s = self.t * self.t + 1.0 / (self.t * self.t);
        let c2 = self.scale * self.scale;
        (r * r * r * 2.0 - r * s) * c2
    }

    fn start_derivative(&self) -> C64 {
        c64(0.0, self.scale * (1.0 - self.t * self.t) / self.t)
    }

    pub fn eval(&self, zeta: C64) -> Result<C64> {
        self.eval_with_derivative(zeta).map(|v| v.0)
    }

    /// `(ρ(ζ), ρ'(ζ))` for `0 <= Im ζ <= R`.
    pub fn eval_with_derivative(&self, zeta: C64) -> Result<(C64, C64)> {
        let slack = 1e-9 * self.height.max(1.0);
        if !(zeta.im >= -slack && zeta.im <= self.height + slack) || !zeta.re.is_finite() {
            return Err(Error::out_of_domain(zeta));
        }
        let mut x = (zeta.re + PI).rem_euclid(TAU) - PI;
        let mirrored = x < 0.0;
        if mirrored {
            x = -x;
        }
        let ode = Dopri::default();
        let mut state = [c64(1.0, 0.0), self.start_derivative()];
        for d in [c64(x, 0.0), c64(0.0, zeta.im)] {
            if d.norm() == 0.0 {
                continue;
            }
            state = ode.solve(state, |_, y| [y[1] * d, self.rhs_p(y[0]) * d])?;
        }
        let (v, dv) = (state[0], state[1]);
        Ok(if mirrored { (v.conj(), -dv.conj()) } else { (v, dv) })
    }

    /// A preimage of `z` under `ρ`, with real part in `(-π, π]`.
    pub fn inverse(&self, z: C64) -> Result<C64> {
        let t = self.t;
        if !(z.norm() < 1.0) || (z.im == 0.0 && z.re.abs() <= t) {
            return Err(Error::out_of_domain(z));
        }
        let mut zeta = self.inverse_seed(z)?;
        let mut last = f64::INFINITY;
        for _ in 0..30 {
            zeta = c64(zeta.re, zeta.im.clamp(0.0, self.height));
            let (v, dv) = self.eval_with_derivative(zeta)?;
            let res = (v - z).norm();
            if res < self.newton_tol {
                return Ok(c64((zeta.re + PI).rem_euclid(TAU) - PI, zeta.im));
            }
            if res > last && res > 1e3 * self.newton_tol {
                break;
            }
            last = res;
            zeta -= (v - z) / dv;
        }
        Err(Error::NoConvergence(format!("inverse of the slit covering at {z}")))
    }

    /// Continuation of `dζ/dρ = 1/ρ'` from `ρ = 1`, detouring above or below
    /// the slit for targets left of the branch point `t`.
    fn inverse_seed(&self, z: C64) -> Result<C64> {
        let ode = Dopri::default();
        let c2 = self.scale * self.scale;
        let s = self.t * self.t + 1.0 / (self.t * self.t);
        let mut waypoints = Vec::new();
        if z.re < self.t + 0.05 {
            let side = if z.im < 0.0 { -1.0 } else { 1.0 };
            waypoints.push(c64(0.0, 0.9 * side));
        }
        waypoints.push(z);
        let mut from = c64(1.0, 0.0);
        let mut state = [c64(0.0, 0.0), self.start_derivative()];
        for to in waypoints {
            let d = to - from;
            let a = from;
            state = ode.solve(state, |s_, y| {
                let r = a + d * s_;
                let dp = (r * r * r * 4.0 - r * (2.0 * s)) * c2;
                [d / y[1], d * dp / (y[1] * 2.0)]
            })?;
            from = to;
        }
        Ok(state[0])
    }

    /// Pullback `φ(ρ(ζ)) ρ'(ζ)²` of a differential on the slit disk.
    pub fn lift(&self, phi: impl Fn(C64) -> C64, zeta: C64) -> Result<C64> {
        let (v, dv) = self.eval_with_derivative(zeta)?;
        Ok(phi(v) * dv * dv)
    }

    /// Period integral of the lift, reduced to the slit:
    /// `2C ∫_{-t}^{t} φ(x) sqrt((t² - x²)(1/t² - x²)) dx`, by Gauss-Chebyshev
    /// of the second kind.
    pub fn phi_tilde_zero(&self, phi: impl Fn(C64) -> C64) -> C64 {
        self.phi_tilde_zero_with(phi, self.slit_nodes)
    }

    pub fn phi_tilde_zero_with(&self, phi: impl Fn(C64) -> C64, nodes: usize) -> C64 {
        let t = self.t;
        let h = PI / (nodes + 1) as f64;
        let mut acc = Vec::with_capacity(nodes);
        for k in 1..=nodes {
            let (sn, cs) = (k as f64 * h).sin_cos();
            let x = t * cs;
            let g = phi(c64(x, 0.0)) * (1.0 / (t * t) - x * x).sqrt();
            acc.push(g * (h * sn * sn));
        }
        crate::par::pairwise_sum(&acc) * (2.0 * self.scale * t * t)
    }

    /// The same period integral as a trapezoid rule on `Im ζ = height`.
    pub fn phi_tilde_zero_contour(&self, phi: impl Fn(C64) -> C64, height: f64, m: usize) -> Result<C64> {
        let mut err = None;
        let v = contour_fourier(
            |zeta| match self.lift(&phi, zeta) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    c64(0.0, 0.0)
                }
            },
            Contour::Horizontal { height, period: TAU },
            m,
        )?;
        match err {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agm_values() {
        assert!((complete_k(0.0) - PI / 2.0).abs() < 1e-15);
        // K(1/sqrt 2) = Γ(1/4)² / (4 sqrt π)
        assert!((complete_k(0.5f64.sqrt()) - 1.854_074_677_301_372).abs() < 1e-13);
    }

    #[test]
    fn small_slit_limit() {
        // thin slit: R ≈ ln(2/t)
        let t = 1e-2;
        assert!((height_of_t(t).unwrap() - (2.0 / t).ln()).abs() < 1e-8);
    }

    #[test]
    fn radicand_positive_on_slit() {
        let d = EllipticCoverData::new(0.5).unwrap();
        for k in 1..100 {
            assert!(d.radicand(0.5 * k as f64 / 100.0) > 0.0);
        }
    }

    #[test]
    fn rejects_bad_t() {
        assert!(EllipticCoverData::new(0.0).is_err());
        assert!(EllipticCoverData::new(1.0).is_err());
        assert!(t_of_r(-1.0).is_err());
    }

    #[test]
    fn normalisation() {
        let d = EllipticCoverData::new(0.5).unwrap();
        let (v, _) = d.eval_with_derivative(c64(0.0, d.height())).unwrap();
        assert!((v - c64(0.5, 0.0)).norm() < 1e-9);
        let (v, _) = d.eval_with_derivative(c64(PI, d.height())).unwrap();
        assert!((v + c64(0.5, 0.0)).norm() < 1e-9);
        let (v, _) = d.eval_with_derivative(c64(PI, 0.0)).unwrap();
        assert!((v + c64(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn inverse_round_trip() {
        let d = EllipticCoverData::new(0.4).unwrap();
        for z in [c64(0.1, 0.3), c64(-0.7, 0.01), c64(-0.6, 0.0), c64(0.8, 0.0), c64(0.2, -0.5), c64(0.0, 1e-4)] {
            let zeta = d.inverse(z).unwrap();
            assert!(zeta.im >= 0.0 && zeta.im <= d.height());
            assert!((d.eval(zeta).unwrap() - z).norm() < 1e-9, "{z}");
        }
        assert!(d.inverse(c64(0.1, 0.0)).is_err());
    }

    #[test]
    fn modulus_two_ways() {
        for t in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9] {
            let a = height_of_t(t).unwrap();
            let b = modulus_by_particular_solutions(t).unwrap();
            assert!((a - b).abs() < 1e-6, "t = {t}: {a} vs {b}");
        }
        for r in [1.0, 2.0, 4.0] {
            let t = t_of_r(r).unwrap();
            assert!((height_of_t(t).unwrap() - r).abs() < 1e-10);
        }
    }

    #[test]
    fn slit_integral_matches_contour() {
        for t in [0.3, 0.5, 0.7] {
            let d = EllipticCoverData::new(t).unwrap();
            let phi = |z: C64| 1.0 + z * c64(0.3, 0.1) + z * z * 0.5;
            let a = d.phi_tilde_zero(phi);
            let b = d.phi_tilde_zero_contour(phi, 0.5 * d.height(), 64).unwrap();
            assert!((a - b).norm() < 1e-8, "t = {t}: {a} vs {b}");
        }
    }
}
