//! Integrable holomorphic quadratic differentials: rational dictionary
//! elements, the two-dimensional space on the period-3 quotient, cyclic
//! Poincare series, lifts and norms.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domains::{CoveringMap, Region};
use crate::quadrature::{self, Decay, QuadOptions};
use crate::{c64, Error, Result, C64};

/// Closed-form expression of a differential in the plane coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    Zero,
    /// `coef · Π (z - root)^power`.
    Rational { coef: C64, factors: Vec<(C64, i32)> },
    /// `Σ residue / (z - pole)`.
    PartialFractions { terms: Vec<(C64, C64)> },
    /// Lift of `(a + b w) / (w (w³ - 1)) dw²` under `w = exp(2πiz/period)`:
    /// `-(2π/period)² (a w + b w²) / (w³ - 1)`.
    QuotientLift { a: C64, b: C64, period: f64 },
    /// `Σ_{lo <= n <= hi} inner(z + n step)`.
    TranslateSum { inner: Box<QuadraticDifferential>, step: f64, lo: i64, hi: i64 },
    /// `inner(π(ζ)) π'(ζ)²`.
    Lift { inner: Box<QuadraticDifferential>, cover: CoveringMap },
    Scaled { factor: C64, inner: Box<QuadraticDifferential> },
    Sum { terms: Vec<QuadraticDifferential> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDifferential {
    pub expr: Expr,
    /// Simple poles (location, order). For periodic differentials these are
    /// representatives; translates by the period are implied.
    pub poles: Vec<(C64, f64)>,
    pub period: Option<f64>,
    /// `|φ(z)| <= coef |z|^-degree` far out along the real direction.
    pub decay: Option<Decay>,
}

impl QuadraticDifferential {
    pub fn zero() -> Self {
        QuadraticDifferential { expr: Expr::Zero, poles: vec![], period: None, decay: None }
    }

    /// `coef · Π (z - root)^power`; poles are the roots with negative power.
    pub fn rational(coef: C64, factors: Vec<(C64, i32)>) -> Result<Self> {
        let poles: Vec<(C64, f64)> =
            factors.iter().filter(|f| f.1 < 0).map(|f| (f.0, -f.1 as f64)).collect();
        let degree = -factors.iter().map(|f| f.1).sum::<i32>() as f64;
        // |z - a| >= |z|/2 once |z| >= 2|a|
        let mut c = coef.norm();
        for &(_, e) in &factors {
            c *= if e < 0 { 2f64.powi(-e) } else { 1.5f64.powi(e) };
        }
        Ok(QuadraticDifferential {
            expr: Expr::Rational { coef, factors },
            poles,
            period: None,
            decay: (degree > 0.0).then_some(Decay { coef: c, degree }),
        })
    }

    pub fn partial_fractions(terms: Vec<(C64, C64)>, decay: Option<Decay>) -> Self {
        let poles = terms.iter().filter(|t| t.1 != c64(0.0, 0.0)).map(|t| (t.0, 1.0)).collect();
        QuadraticDifferential { expr: Expr::PartialFractions { terms }, poles, period: None, decay }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match &self.expr {
            Expr::Zero => c64(0.0, 0.0),
            Expr::Rational { coef, factors } => {
                let mut v = *coef;
                for &(a, e) in factors {
                    v *= (z - a).powi(e);
                }
                v
            }
            Expr::PartialFractions { terms } => {
                terms.iter().map(|&(p, r)| r / (z - p)).sum()
            }
            Expr::QuotientLift { a, b, period } => quotient_lift(*a, *b, *period, z),
            Expr::TranslateSum { inner, step, lo, hi } => {
                let mut s = c64(0.0, 0.0);
                for n in *lo..=*hi {
                    s += inner.eval(z + step * n as f64);
                }
                s
            }
            Expr::Lift { inner, cover } => match cover.eval(z) {
                Ok((v, d)) => inner.eval(v) * d * d,
                Err(_) => c64(f64::NAN, f64::NAN),
            },
            Expr::Scaled { factor, inner } => inner.eval(z) * factor,
            Expr::Sum { terms } => terms.iter().map(|t| t.eval(z)).sum(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        QuadraticDifferential {
            expr: Expr::Scaled { factor, inner: Box::new(self.clone()) },
            poles: self.poles.clone(),
            period: self.period,
            decay: self.decay.map(|d| Decay { coef: d.coef * factor.norm(), degree: d.degree }),
        }
    }

    pub fn sum(terms: Vec<QuadraticDifferential>) -> Self {
        let mut poles: Vec<(C64, f64)> = Vec::new();
        for t in &terms {
            for &p in &t.poles {
                if !poles.iter().any(|q| (q.0 - p.0).norm() < 1e-12) {
                    poles.push(p);
                }
            }
        }
        let period = match terms.first() {
            Some(t) if terms.iter().all(|s| s.period == t.period) => t.period,
            _ => None,
        };
        let decay = terms.iter().try_fold(None::<Decay>, |acc, t| {
            let d = t.decay?;
            Some(Some(match acc {
                None => d,
                Some(a) => Decay { coef: a.coef + d.coef, degree: a.degree.min(d.degree) },
            }))
        });
        QuadraticDifferential { expr: Expr::Sum { terms }, poles, period, decay: decay.flatten() }
    }

    /// Poles (with translates for periodic differentials) whose real part lies
    /// in `[x0, x1]`.
    pub fn poles_between(&self, x0: f64, x1: f64) -> Vec<C64> {
        let mut out = Vec::new();
        for &(p, _) in &self.poles {
            match self.period {
                None => {
                    if p.re >= x0 - 1e-12 && p.re <= x1 + 1e-12 {
                        out.push(p);
                    }
                }
                Some(per) => {
                    let k0 = ((x0 - p.re) / per).floor() as i64 - 1;
                    let k1 = ((x1 - p.re) / per).ceil() as i64 + 1;
                    for k in k0..=k1 {
                        let q = p + per * k as f64;
                        if q.re >= x0 - 1e-12 && q.re <= x1 + 1e-12 {
                            out.push(q);
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest normalised Cauchy-Riemann residual `|∂φ/∂z̄| / max(1, |φ'|)`
    /// over the given points, by central differences.
    pub fn cr_residual(&self, points: &[C64], h: f64) -> f64 {
        points
            .iter()
            .map(|&z| {
                let fx = (self.eval(z + h) - self.eval(z - h)) / (2.0 * h);
                let fy = (self.eval(z + C64::i() * h) - self.eval(z - C64::i() * h)) / (2.0 * h);
                let dbar = (fx + C64::i() * fy) * 0.5;
                let dz = (fx - C64::i() * fy) * 0.5;
                dbar.norm() / dz.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

fn quotient_lift(a: C64, b: C64, period: f64, z: C64) -> C64 {
    let k = 2.0 * PI / period;
    // Evaluate in whichever of w, 1/w is small to avoid overflow far from
    // the real axis.
    if z.im >= 0.0 {
        let w = (C64::i() * z * k).exp();
        -(a * w + b * w * w) / (w * w * w - 1.0) * (k * k)
    } else {
        let v = (-C64::i() * z * k).exp();
        -(a * v * v + b * v) / (1.0 - v * v * v) * (k * k)
    }
}

/// A truncated cyclic Poincare series with its tail bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSeries {
    pub differential: QuadraticDifferential,
    pub tail_bound: f64,
}

/// `Θ_N(f)(z) = Σ_{|n| <= N} f(z + n step)`.
pub fn poincare_series(f: &QuadraticDifferential, step: f64, n: usize) -> Result<PoincareSeries> {
    if !(step > 0.0) {
        return Err(Error::invalid("series step must be positive"));
    }
    let tail_bound = match (&f.expr, f.decay) {
        (Expr::Zero, _) => 0.0,
        (_, Some(d)) if d.degree >= 2.0 => {
            if n == 0 {
                f64::INFINITY
            } else {
                let sn = step * n as f64;
                2.0 * d.coef * sn.powf(1.0 - d.degree) / (step * (d.degree - 1.0))
            }
        }
        _ => return Err(Error::invalid("Poincare series needs decay of degree at least 2")),
    };
    let n = n as i64;
    let mut poles = Vec::new();
    for &(p, o) in &f.poles {
        for k in -n..=n {
            poles.push((p - step * k as f64, o));
        }
    }
    let differential = QuadraticDifferential {
        expr: Expr::TranslateSum { inner: Box::new(f.clone()), step, lo: -n, hi: n },
        poles,
        period: None,
        decay: None,
    };
    Ok(PoincareSeries { differential, tail_bound })
}

/// `∫∫_region |φ|`, with the poles of `φ` declared to the integrator.
pub fn q_norm(phi: &QuadraticDifferential, region: &Region, tol: f64) -> Result<f64> {
    let opts = norm_options(phi, region, tol);
    let r = quadrature::integrate2d_with(region, |z| c64(phi.eval(z).norm(), 0.0), &opts)?;
    Ok(r.value.re)
}

pub(crate) fn norm_options(phi: &QuadraticDifferential, region: &Region, tol: f64) -> QuadOptions {
    let (x0, x1) = match region {
        Region::Cell { period, index } => (*index as f64 * period, (*index + 1) as f64 * period),
        Region::PlaneMinusIntegers => (-1e300, 1e300),
        r => r.bounding_box().map(|b| (b.0, b.1)).unwrap_or((-1e300, 1e300)),
    };
    let (x0, x1) = if x0 < -1e6 || x1 > 1e6 {
        let t = 3.0 * (QuadOptions::default().plane_truncation as f64 + 1.0);
        (x0.max(-t), x1.min(t))
    } else {
        (x0, x1)
    };
    QuadOptions {
        decay: phi.decay,
        ..QuadOptions::with_tol(tol).singular_at(phi.poles_between(x0, x1))
    }
}

/// Basis of the quotient differentials, lifted to the period-3 cell and
/// normalised to unit norm over one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsBasis {
    /// Lift of `dw² / (w (w³ - 1))`.
    pub phi_r: QuadraticDifferential,
    /// Lift of `dw² / (w³ - 1)`.
    pub phi_l: QuadraticDifferential,
}

pub const QS_PERIOD: f64 = 3.0;

/// Unnormalised lifted element for `(a, b)`.
pub fn quotient_differential(a: C64, b: C64) -> QuadraticDifferential {
    QuadraticDifferential {
        expr: Expr::QuotientLift { a, b, period: QS_PERIOD },
        poles: (0..3).map(|k| (c64(k as f64, 0.0), 1.0)).collect(),
        period: Some(QS_PERIOD),
        decay: None,
    }
}

static QS_NORMS: OnceLock<std::result::Result<(f64, f64), Error>> = OnceLock::new();

pub fn qs_basis() -> Result<QsBasis> {
    let (nr, nl) = QS_NORMS
        .get_or_init(|| {
            let cell = Region::Cell { period: QS_PERIOD, index: 0 };
            let r = q_norm(&quotient_differential(c64(1.0, 0.0), c64(0.0, 0.0)), &cell, 1e-11)?;
            let l = q_norm(&quotient_differential(c64(0.0, 0.0), c64(1.0, 0.0)), &cell, 1e-11)?;
            Ok((r, l))
        })
        .clone()?;
    Ok(QsBasis {
        phi_r: quotient_differential(c64(1.0 / nr, 0.0), c64(0.0, 0.0)),
        phi_l: quotient_differential(c64(0.0, 0.0), c64(1.0 / nl, 0.0)),
    })
}

impl QsBasis {
    /// `a φ^r + b φ^l` as a single lifted element.
    pub fn combination(&self, a: C64, b: C64) -> QuadraticDifferential {
        let (ar, _) = coefficients(&self.phi_r);
        let (_, bl) = coefficients(&self.phi_l);
        quotient_differential(a * ar, b * bl)
    }

    /// Determinant of the evaluation matrix at two points.
    pub fn gram_determinant(&self, z1: C64, z2: C64) -> C64 {
        self.phi_r.eval(z1) * self.phi_l.eval(z2) - self.phi_l.eval(z1) * self.phi_r.eval(z2)
    }
}

fn coefficients(q: &QuadraticDifferential) -> (C64, C64) {
    match &q.expr {
        Expr::QuotientLift { a, b, .. } => (*a, *b),
        _ => (c64(0.0, 0.0), c64(0.0, 0.0)),
    }
}

/// Residues of a lifted quotient element at the integers `0, 1, 2` (the
/// pattern repeats with period 3).
pub fn lift_residues(phi: &QuadraticDifferential) -> Result<[C64; 3]> {
    let Expr::QuotientLift { a, b, period } = &phi.expr else {
        return Err(Error::invalid("residues are defined for lifted quotient elements only"));
    };
    if (*period - QS_PERIOD).abs() > 0.0 {
        return Err(Error::invalid("residues assume period 3"));
    }
    let mut out = [c64(0.0, 0.0); 3];
    for (k, o) in out.iter_mut().enumerate() {
        let w = C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
        *o = c64(0.0, 2.0 * PI / 9.0) * (a * w + b * w * w);
    }
    Ok(out)
}

/// A rational `f = Σ_{p=0}^{P-1} r_p / (z - p)` with `Θ(f) = φ` for a lifted
/// quotient element `φ` and `|f(z)| = O(|z|^-decay)`.
///
/// `Θ(f)` has residue `Σ_{p ≡ k} r_p` at the class `k mod 3`, and a periodic
/// function decaying at both ends of the cylinder is fixed by its residues,
/// so matching the three class sums reproduces `φ` exactly. The remaining
/// freedom kills the moments `Σ r_p p^q`, `q = 1..decay-2`.
pub fn poincare_preimage(phi: &QuadraticDifferential, decay: usize) -> Result<QuadraticDifferential> {
    if decay < 2 {
        return Err(Error::invalid("preimage decay must be at least 2"));
    }
    let s = lift_residues(phi)?;
    let npoles = 3 + decay - 2;
    let mut m = DMatrix::<C64>::zeros(npoles, npoles);
    let mut rhs = DVector::<C64>::zeros(npoles);
    for k in 0..3 {
        for p in 0..npoles {
            if p % 3 == k {
                m[(k, p)] = c64(1.0, 0.0);
            }
        }
        rhs[k] = s[k];
    }
    for q in 1..=decay - 2 {
        for p in 0..npoles {
            m[(2 + q, p)] = c64((p as f64).powi(q as i32), 0.0);
        }
    }
    let r = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NoConvergence("singular preimage system".into()))?;
    let terms: Vec<(C64, C64)> = (0..npoles).map(|p| (c64(p as f64, 0.0), r[p])).collect();
    // Far field: the first surviving moment is q = decay - 1.
    let pmax = (npoles - 1) as f64;
    let mass: f64 = terms.iter().map(|t| t.1.norm()).sum();
    let coef = 2.0 * mass * pmax.powi(decay as i32 - 1).max(1.0);
    Ok(QuadraticDifferential::partial_fractions(
        terms,
        Some(Decay { coef, degree: decay as f64 }),
    ))
}

/// `(1/W) Σ_{0 <= i < W} g(z - 3i)` for the preimage `g` of
/// [`poincare_preimage`]: the same cyclic series, spread over `W` cells so
/// that partial sums ramp up and down gradually.
pub fn windowed_preimage(phi: &QuadraticDifferential, decay: usize, window: usize) -> Result<QuadraticDifferential> {
    let g = poincare_preimage(phi, decay)?;
    if window <= 1 {
        return Ok(g);
    }
    let w = window as i64;
    let d = g.decay.expect("preimage carries its decay");
    let poles = g
        .poles
        .iter()
        .flat_map(|&(p, o)| (0..w).map(move |i| (p + QS_PERIOD * i as f64, o)))
        .collect();
    // |z - 3i| >= |z|/2 once |z| >= 6W
    let decay = Some(Decay { coef: d.coef * 2f64.powf(d.degree), degree: d.degree });
    Ok(QuadraticDifferential {
        expr: Expr::Scaled {
            factor: c64(1.0 / window as f64, 0.0),
            inner: Box::new(QuadraticDifferential {
                expr: Expr::TranslateSum { inner: Box::new(g), step: -QS_PERIOD, lo: 0, hi: w - 1 },
                poles: vec![],
                period: None,
                decay: None,
            }),
        },
        poles,
        period: None,
        decay,
    })
}

/// Which dictionary pole a string entry uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictKind {
    Alpha,
    Beta,
}

impl DictKind {
    /// `3j + 1` for alpha, `3j + 2` for beta.
    pub fn pole(self, j: i64) -> f64 {
        match self {
            DictKind::Alpha => 3.0 * j as f64 + 1.0,
            DictKind::Beta => 3.0 * j as f64 + 2.0,
        }
    }
}

/// `1 / ((z - a)(z - 3L)(z - 6L))` with `a` the alpha or beta point of `j`.
pub fn dictionary_differential(kind: DictKind, j: i64, l: i64) -> Result<QuadraticDifferential> {
    if j.abs() > l || l <= 0 {
        return Err(Error::invalid(format!("dictionary index {j} outside |j| <= {l}")));
    }
    let a = kind.pole(j);
    let (p1, p2) = (3.0 * l as f64, 6.0 * l as f64);
    if a == p1 || a == p2 {
        return Err(Error::invalid(format!("dictionary pole {a} collides with {p1} or {p2}")));
    }
    QuadraticDifferential::rational(
        c64(1.0, 0.0),
        vec![(c64(a, 0.0), -1), (c64(p1, 0.0), -1), (c64(p2, 0.0), -1)],
    )
}

/// `Σ_{|j| <= L}` of the string entries, `kinds[j + L]` choosing alpha or beta.
pub fn dictionary_string(kinds: &[DictKind], l: i64) -> Result<QuadraticDifferential> {
    if kinds.len() as i64 != 2 * l + 1 {
        return Err(Error::invalid("string length must be 2L + 1"));
    }
    let terms = kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| dictionary_differential(k, i as i64 - l, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadraticDifferential::sum(terms))
}

/// `φ(π(ζ)) π'(ζ)²`.
pub fn lift(phi: &QuadraticDifferential, cover: &CoveringMap) -> QuadraticDifferential {
    if *cover == CoveringMap::Identity {
        return phi.clone();
    }
    let period = match cover {
        CoveringMap::ExpCover | CoveringMap::EllipticCover { .. } => Some(2.0 * PI),
        _ => None,
    };
    QuadraticDifferential {
        expr: Expr::Lift { inner: Box::new(phi.clone()), cover: cover.clone() },
        poles: vec![],
        period,
        decay: None,
    }
}
