//! Fitted scalar prefactors of the two closed-form pairings: the strip
//! coefficient against a periodic lift on one period cell, and the annulus
//! coefficient against `1 / (z - α)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::pairing_with_error;
use crate::domains::{CoveringMap, Region};
use crate::elliptic::EllipticCoverData;
use crate::fields::{annulus_family, strip_family, LambdaParam};
use crate::qdiff::{lift, QuadraticDifferential};
use crate::{c64, Error, Result, C64};

/// Which coefficients are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditField {
    #[default]
    Shear,
    /// Every coefficient replaced by 0; all fitted constants come out 0.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditOptions {
    pub lambdas: Vec<C64>,
    /// Slit half-length of the elliptic cover that supplies the periodic lift.
    pub half_length: f64,
    /// Inner radius of the annulus.
    pub inner: f64,
    /// `α` as multiples of `inner`.
    pub alpha_fractions: Vec<f64>,
    pub tol: f64,
    pub field: AuditField,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            lambdas: vec![c64(0.5, 0.0), c64(1.0, 0.0), c64(1.0, 0.5), c64(0.8, -0.3), c64(1.5, 0.2)],
            half_length: 0.5,
            inner: 0.5,
            alpha_fractions: vec![0.02, 0.05, 0.1],
            tol: 1e-11,
            field: AuditField::Shear,
        }
    }
}

/// `λ² / (4 + λ²)`.
fn response(lambda: C64) -> C64 {
    lambda * lambda / (4.0 + lambda * lambda)
}

fn paired_lambda(lambda: C64, field: AuditField) -> Result<LambdaParam> {
    match field {
        AuditField::Shear => LambdaParam::new(lambda),
        AuditField::Zero => LambdaParam::new(c64(0.0, 0.0)),
    }
}

/// Least-squares `c` in `y ≈ c x`, with the largest residual relative to the
/// largest `|y|` (absolute when every `y` vanishes).
fn fit_scalar(x: &[C64], y: &[C64]) -> (C64, f64) {
    let den: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let num: C64 = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
    let c = if den == 0.0 { c64(0.0, 0.0) } else { num / den };
    let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = x.iter().zip(y).map(|(a, b)| (b - c * a).norm()).fold(0.0, f64::max);
    (c, if scale > 0.0 { worst / scale } else { worst })
}

/// Spread of `ratios` about their mean, relative to the mean (absolute when
/// the mean vanishes).
fn spread(ratios: &[C64]) -> f64 {
    let mean = ratios.iter().sum::<C64>() / ratios.len() as f64;
    let worst = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max);
    if mean.norm() > 0.0 {
        worst / mean.norm()
    } else {
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusFit {
    pub height: f64,
    pub area: f64,
    /// `∫_0^{2π} φ̃(ξ) dξ` of the lift of `φ ≡ 1`.
    pub period_integral: C64,
    pub lambdas: Vec<C64>,
    pub pairings: Vec<C64>,
    /// `pairing / (λ²/(4+λ²))` per panel point.
    pub ratios: Vec<C64>,
    pub ratio_spread: f64,
    /// Relative change of the pairings under a refined cell rule.
    pub rule_change: f64,
    /// Fitted `c` in `pairing = c · period_integral · area · λ²/(4+λ²)`.
    pub constant: C64,
    /// The same constant with the mean `period_integral / 2π` in place of the
    /// period integral.
    pub constant_mean_convention: C64,
    pub closed_form: f64,
    pub displayed: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusFit {
    pub inner: f64,
    pub alphas: Vec<f64>,
    pub lambda: C64,
    pub pairings: Vec<C64>,
    pub slope: C64,
    pub intercept: C64,
    /// Largest deviation from the fitted line, relative to the largest pairing.
    pub linearity_residual: f64,
    /// `slope / (ln(1/inner) · λ²/(4+λ²))`.
    pub prefactor: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsAudit {
    pub field: AuditField,
    pub torus: TorusFit,
    /// One line fit per panel parameter.
    pub annulus: Vec<AnnulusFit>,
    /// Least-squares prefactor over all annulus fits.
    pub annulus_prefactor: C64,
    pub annulus_prefactor_spread: f64,
    /// `2π`.
    pub annulus_closed_form: f64,
    /// The displayed `-2πi · Area(annulus)`, in the same normalization.
    pub annulus_displayed: C64,
    /// Largest of all fit residuals and spreads.
    pub max_residual: f64,
}

pub fn constants_audit(opts: &AuditOptions) -> Result<ConstantsAudit> {
    if opts.lambdas.len() < 2 || opts.alpha_fractions.len() < 2 {
        return Err(Error::invalid("need at least two panel parameters and two alphas"));
    }
    if !(opts.inner > 0.0 && opts.inner < 1.0) || !(opts.tol > 0.0) {
        return Err(Error::invalid("inner radius must lie in (0, 1) and tol must be positive"));
    }
    if opts.alpha_fractions.iter().any(|a| !(a.abs() < 1.0)) {
        return Err(Error::invalid("alphas must lie inside the inner disk"));
    }
    let torus = torus_fit(opts)?;
    let annulus = opts.lambdas.iter().map(|&l| annulus_fit(opts, l)).collect::<Result<Vec<_>>>()?;
    let log = (1.0 / opts.inner).ln();
    let x: Vec<C64> = annulus.iter().map(|a| log * response(a.lambda)).collect();
    let y: Vec<C64> = annulus.iter().map(|a| a.slope).collect();
    let (annulus_prefactor, _) = fit_scalar(&x, &y);
    let ratios: Vec<C64> = annulus.iter().map(|a| a.prefactor).collect();
    let annulus_prefactor_spread = spread(&ratios);
    let max_residual = annulus
        .iter()
        .map(|a| a.linearity_residual)
        .chain([torus.residual, torus.ratio_spread, torus.rule_change, annulus_prefactor_spread])
        .fold(0.0, f64::max);
    Ok(ConstantsAudit {
        field: opts.field,
        torus,
        annulus,
        annulus_prefactor,
        annulus_prefactor_spread,
        annulus_closed_form: TAU,
        annulus_displayed: c64(0.0, -TAU * PI * (1.0 - opts.inner * opts.inner)) / log,
        max_residual,
    })
}

/// Nodes and weights of the trapezoid-by-Gauss rule on the two halves of the
/// period cell, where the strip coefficient is smooth.
fn cell_rule(height: f64, m: usize, n: usize) -> Vec<(C64, f64)> {
    let (gx, gw) = crate::quadrature::gauss::legendre(n);
    let half = height / 2.0;
    let mut out = Vec::with_capacity(2 * m * n);
    for y0 in [0.0, half] {
        for (x, w) in gx.iter().zip(gw) {
            let y = y0 + half * (x + 1.0) / 2.0;
            for k in 0..m {
                out.push((c64(TAU * k as f64 / m as f64, y), w * half / 2.0 * TAU / m as f64));
            }
        }
    }
    out
}

fn torus_pairings(opts: &AuditOptions, data: &EllipticCoverData, m: usize, n: usize) -> Result<Vec<C64>> {
    let height = data.height();
    let cover = CoveringMap::EllipticCover { half_length: opts.half_length, height };
    let lifted = lift(&QuadraticDifferential::rational(c64(1.0, 0.0), vec![])?, &cover);
    let rule = cell_rule(height, m, n);
    let phi: Vec<C64> = crate::par::map_slice(crate::par::Exec::default(), &rule, |(z, _)| lifted.eval(*z));
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lift of the constant differential".into()));
    }
    opts.lambdas
        .iter()
        .map(|&l| {
            let mu = strip_family(paired_lambda(l, opts.field)?, height)?;
            let mut terms = Vec::with_capacity(rule.len());
            for ((z, w), p) in rule.iter().zip(&phi) {
                terms.push(mu.eval(*z)? * p * *w);
            }
            Ok(crate::par::pairwise_sum(&terms))
        })
        .collect()
}

/// Trapezoid points per period and Gauss points per half-height.
const TORUS_RULE: (usize, usize) = (64, 16);

fn torus_fit(opts: &AuditOptions) -> Result<TorusFit> {
    let data = EllipticCoverData::new(opts.half_length)?;
    let height = data.height();
    let period_integral = data.phi_tilde_zero(|_| c64(1.0, 0.0));
    let area = TAU * height;
    let (m, n) = TORUS_RULE;
    let pairings = torus_pairings(opts, &data, m, n)?;
    let finer = torus_pairings(opts, &data, 2 * m, n + 8)?;
    let scale = finer.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let change = pairings.iter().zip(&finer).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let rule_change = if scale > 0.0 { change / scale } else { change };
    let x: Vec<C64> = opts.lambdas.iter().map(|&l| period_integral * area * response(l)).collect();
    let (constant, residual) = fit_scalar(&x, &pairings);
    let ratios: Vec<C64> = pairings.iter().zip(&opts.lambdas).map(|(p, &l)| p / response(l)).collect();
    Ok(TorusFit {
        height,
        area,
        period_integral,
        lambdas: opts.lambdas.clone(),
        ratio_spread: spread(&ratios),
        ratios,
        pairings,
        rule_change,
        constant,
        constant_mean_convention: constant * TAU,
        closed_form: -1.0 / TAU,
        displayed: 1.0,
        residual,
    })
}

fn annulus_fit(opts: &AuditOptions, lambda: C64) -> Result<AnnulusFit> {
    let mu = annulus_family(paired_lambda(lambda, opts.field)?, opts.inner)?;
    let region = Region::Annulus { inner: opts.inner };
    let alphas: Vec<f64> = opts.alpha_fractions.iter().map(|f| f * opts.inner).collect();
    let mut pairings = Vec::with_capacity(alphas.len());
    for &a in &alphas {
        let h = QuadraticDifferential::rational(c64(1.0, 0.0), vec![(c64(a, 0.0), -1)])?;
        pairings.push(pairing_with_error(&mu, &h, &region, opts.tol)?.value);
    }
    // complex least squares for y = s α + b
    let n = alphas.len() as f64;
    let ma = alphas.iter().sum::<f64>() / n;
    let my = pairings.iter().sum::<C64>() / n;
    let saa: f64 = alphas.iter().map(|a| (a - ma) * (a - ma)).sum();
    let say: C64 = alphas.iter().zip(&pairings).map(|(a, y)| (y - my) * (a - ma)).sum();
    let slope = say / saa;
    let intercept = my - slope * ma;
    let scale = pairings.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = alphas.iter().zip(&pairings).map(|(a, y)| (y - slope * *a - intercept).norm()).fold(0.0, f64::max);
    let unit = (1.0 / opts.inner).ln() * response(lambda);
    Ok(AnnulusFit {
        inner: opts.inner,
        alphas,
        lambda,
        pairings,
        slope,
        intercept,
        linearity_residual: if scale > 0.0 { worst / scale } else { worst },
        prefactor: slope / unit,
    })
}
