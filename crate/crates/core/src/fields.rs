//! Beltrami coefficients as closed-form piecewise objects: the shear families
//! on strips, annuli and slit disks, the weighted coefficients on the period-3
//! cells, and the algebra of gluing, pullback and deck twisting.

use serde::{Deserialize, Serialize};

use crate::domains::{cell_index_raw, CoveringMap, Region};
use crate::elliptic::EllipticCoverData;
use crate::qdiff::{QsBasis, QS_PERIOD};
use crate::sampling::Sampler;
use crate::{c64, Error, Result, C64};

/// Shear parameter with `|Im λ| < 1` and `Re λ >= 0`.
///
/// The open set requires `Re λ > 0`; parameters on `Re λ = 0` are admitted and
/// reported by [`LambdaParam::is_boundary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "C64", into = "C64")]
pub struct LambdaParam(C64);

impl LambdaParam {
    pub fn new(lambda: C64) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::invalid("shear parameter must be finite"));
        }
        if lambda.im.abs() >= 1.0 || lambda.re < 0.0 {
            return Err(Error::invalid(format!(
                "shear parameter {lambda} outside |Im| < 1, Re >= 0"
            )));
        }
        Ok(LambdaParam(lambda))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(c64(x, 0.0))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    pub fn is_boundary(self) -> bool {
        self.0.re == 0.0
    }

    /// `iλ/(2 - iλ)`, the value on the lower half of the strip.
    pub fn lower_coefficient(self) -> C64 {
        let il = C64::i() * self.0;
        il / (2.0 - il)
    }

    /// `-iλ/(2 + iλ)`, the value on the upper half of the strip.
    pub fn upper_coefficient(self) -> C64 {
        let il = C64::i() * self.0;
        -il / (2.0 + il)
    }

    /// Largest modulus taken by the shear coefficient.
    pub fn dilatation(self) -> f64 {
        self.lower_coefficient().norm().max(self.upper_coefficient().norm())
    }

    /// Membership in the sub-domain where the shear stays below `t0`.
    pub fn in_lambda_prime(self, t0: f64) -> bool {
        self.dilatation() < t0
    }
}

impl TryFrom<C64> for LambdaParam {
    type Error = Error;
    fn try_from(v: C64) -> Result<Self> {
        LambdaParam::new(v)
    }
}

impl From<LambdaParam> for C64 {
    fn from(l: LambdaParam) -> C64 {
        l.0
    }
}

/// Weights `(a_n, b_n)` mixing the two basis differentials cell by cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum WeightSequences {
    /// `a_n = 1/(1 + 2^-n)`, `b_n = 1 - a_n`.
    Logistic,
    Constant { a: f64, b: f64 },
}

impl Default for WeightSequences {
    fn default() -> Self {
        WeightSequences::Logistic
    }
}

pub const WEIGHT_LIMIT_INDEX: i64 = 40;
pub const WEIGHT_LIMIT_TOL: f64 = 1e-6;

impl WeightSequences {
    pub fn constant(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a + b == 0.0 {
            return Err(Error::invalid(format!("weights ({a}, {b}) must lie in [0,1] and not both vanish")));
        }
        Ok(WeightSequences::Constant { a, b })
    }

    pub fn a(&self, n: i64) -> f64 {
        match self {
            WeightSequences::Logistic => 1.0 / (1.0 + (-(n as f64)).exp2()),
            WeightSequences::Constant { a, .. } => *a,
        }
    }

    pub fn b(&self, n: i64) -> f64 {
        match self {
            WeightSequences::Logistic => 1.0 - self.a(n),
            WeightSequences::Constant { b, .. } => *b,
        }
    }

    /// `a_n -> 1, b_n -> 0` forward and the reverse backward, checked at
    /// `n = ±40`.
    pub fn limits_hold(&self) -> bool {
        let n = WEIGHT_LIMIT_INDEX;
        (self.a(n) - 1.0).abs() < WEIGHT_LIMIT_TOL
            && self.b(n).abs() < WEIGHT_LIMIT_TOL
            && self.a(-n).abs() < WEIGHT_LIMIT_TOL
            && (self.b(-n) - 1.0).abs() < WEIGHT_LIMIT_TOL
    }
}

/// Closed-form value of a piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case")]
pub enum Formula {
    Zero,
    /// Lower/upper strip coefficients split at half height.
    StripShear { lambda: LambdaParam, height: f64 },
    /// Shear on `inner < |z - center| < outer`, split at the geometric mean
    /// radius; the phase is `(z - c)/conj(z - c)`.
    AnnulusShear { lambda: LambdaParam, center: C64, inner: f64, outer: f64 },
    /// Pushforward of the strip shear through the elliptic covering, placed
    /// on the disk `|z - center| < scale`.
    SlitDiskShear { lambda: LambdaParam, half_length: f64, center: C64, scale: f64 },
    /// `coef (z - c)/conj(z - c)`, the coefficient of `z |z|^(K-1)` about `c`.
    Radial { coef: f64, center: C64 },
    /// `k |ψ_n| / ψ_n` with `ψ_n = a_n φ^r + b_n φ^l` on cell `n`.
    Weighted { k: f64, weights: WeightSequences, basis: QsBasis },
    /// `μ(π(z)) conj(π'(z)) / π'(z)`.
    Pullback { inner: Box<BeltramiField>, cover: CoveringMap },
}

impl Formula {
    pub fn eval(&self, z: C64) -> Result<C64> {
        match self {
            Formula::Zero => Ok(c64(0.0, 0.0)),
            Formula::StripShear { lambda, height } => Ok(if z.im <= height / 2.0 {
                lambda.lower_coefficient()
            } else {
                lambda.upper_coefficient()
            }),
            Formula::AnnulusShear { lambda, center, inner, outer } => {
                let w = z - center;
                let phase = w / w.conj();
                Ok(if w.norm() >= (inner * outer).sqrt() {
                    -lambda.lower_coefficient() * phase
                } else {
                    -lambda.upper_coefficient() * phase
                })
            }
            Formula::SlitDiskShear { lambda, half_length, center, scale } => {
                if lambda.value() == c64(0.0, 0.0) {
                    return Ok(c64(0.0, 0.0));
                }
                let data = EllipticCoverData::new(*half_length)?;
                let zeta = data.inverse((z - center) / scale)?;
                let (_, d) = data.eval_with_derivative(zeta)?;
                let strip = Formula::StripShear { lambda: *lambda, height: data.height() };
                Ok(strip.eval(zeta)? * d / d.conj())
            }
            Formula::Radial { coef, center } => {
                let w = z - center;
                Ok(w / w.conj() * *coef)
            }
            Formula::Weighted { k, weights, basis } => {
                let n = cell_index_raw(QS_PERIOD, z.re);
                let psi = basis.phi_r.eval(z) * weights.a(n) + basis.phi_l.eval(z) * weights.b(n);
                let m = psi.norm();
                if m == 0.0 {
                    return Ok(c64(0.0, 0.0));
                }
                Ok(psi.conj() / m * *k)
            }
            Formula::Pullback { inner, cover } => {
                let (w, d) = cover.eval(z)?;
                if d == c64(0.0, 0.0) {
                    return Err(Error::NonFinite(format!("covering derivative vanishes at {z}")));
                }
                Ok(inner.eval(w)? * d.conj() / d)
            }
        }
    }

    /// Exact sup of the modulus (every formula has piecewise constant modulus).
    pub fn modulus_bound(&self) -> f64 {
        match self {
            Formula::Zero => 0.0,
            Formula::StripShear { lambda, .. } | Formula::SlitDiskShear { lambda, .. } => lambda.dilatation(),
            Formula::AnnulusShear { lambda, inner, .. } => {
                if *inner == 0.0 {
                    lambda.lower_coefficient().norm()
                } else {
                    lambda.dilatation()
                }
            }
            Formula::Weighted { k, .. } => *k,
            Formula::Radial { coef, .. } => coef.abs(),
            Formula::Pullback { inner, .. } => inner.bound,
        }
    }

    /// Sub-regions of `region` on which the formula is smooth.
    pub fn smooth_parts(&self, region: &Region) -> Vec<Region> {
        match (self, region) {
            (Formula::AnnulusShear { center, inner, outer, .. }, Region::Ring { .. } | Region::Annulus { .. })
                if *inner > 0.0 =>
            {
                let (c, lo, hi) = match *region {
                    Region::Ring { center, inner, outer } => (center, inner, outer),
                    Region::Annulus { inner } => (c64(0.0, 0.0), inner, 1.0),
                    _ => unreachable!(),
                };
                let mid = (inner * outer).sqrt();
                if c != *center || !(lo < mid && mid < hi) {
                    return vec![region.clone()];
                }
                vec![
                    Region::Ring { center: c, inner: lo, outer: mid },
                    Region::Ring { center: c, inner: mid, outer: hi },
                ]
            }
            (Formula::StripShear { height, .. }, Region::Rectangle { x0, x1, y0, y1 })
                if *y0 < height / 2.0 && *y1 > height / 2.0 =>
            {
                let m = height / 2.0;
                vec![
                    Region::Rectangle { x0: *x0, x1: *x1, y0: *y0, y1: m },
                    Region::Rectangle { x0: *x0, x1: *x1, y0: m, y1: *y1 },
                ]
            }
            _ => vec![region.clone()],
        }
    }
}

/// A formula valid on `region` minus the `exclude` regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub region: Region,
    pub formula: Formula,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<Region>,
}

impl Piece {
    pub fn contains(&self, z: C64) -> bool {
        self.region.contains(z) && !self.exclude.iter().any(|e| e.contains(z))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltramiField {
    pub domain: Region,
    pub pieces: Vec<Piece>,
    /// Cached bound on the sup norm.
    pub bound: f64,
}

impl BeltramiField {
    pub(crate) fn from_pieces(domain: Region, pieces: Vec<Piece>) -> Result<Self> {
        let bound = pieces.iter().map(|p| p.formula.modulus_bound()).fold(0.0, f64::max);
        if !(bound < 1.0) {
            return Err(Error::invalid(format!("field sup norm {bound} is not below 1")));
        }
        Ok(BeltramiField { domain, pieces, bound })
    }

    pub fn zero(domain: Region) -> Self {
        BeltramiField {
            pieces: vec![Piece { region: domain.clone(), formula: Formula::Zero, exclude: vec![] }],
            domain,
            bound: 0.0,
        }
    }

    /// Value at `z`; the first piece containing `z` answers, and points in the
    /// domain but on a piece boundary read as zero.
    pub fn eval(&self, z: C64) -> Result<C64> {
        if !self.domain.contains(z) {
            return Err(Error::out_of_domain(z));
        }
        match self.pieces.iter().find(|p| p.contains(z)) {
            Some(p) => p.formula.eval(z),
            None => Ok(c64(0.0, 0.0)),
        }
    }

    /// Index of the piece containing `z` and of its smooth part, or `None`
    /// where the field is zero by default.
    pub fn part_at(&self, z: C64) -> Option<(usize, usize)> {
        if !self.domain.contains(z) {
            return None;
        }
        let i = self.pieces.iter().position(|p| p.contains(z))?;
        let p = &self.pieces[i];
        let j = p.formula.smooth_parts(&p.region).iter().position(|r| r.contains(z)).unwrap_or(0);
        Some((i, j))
    }

    pub fn sup_norm(&self) -> f64 {
        self.bound
    }

    /// Largest modulus over random samples in the domain (unbounded domains
    /// use `window`).
    pub fn sampled_sup_norm(&self, samples: usize, window: (f64, f64, f64, f64), seed: u64) -> Result<f64> {
        let mut s = Sampler::new(seed);
        let mut m = 0.0f64;
        for _ in 0..samples {
            let z = s.in_region(&self.domain, window);
            m = m.max(self.eval(z)?.norm());
        }
        Ok(m)
    }
}

pub fn strip_family(lambda: LambdaParam, height: f64) -> Result<BeltramiField> {
    let domain = Region::Strip { height };
    domain.validate()?;
    let formula = if lambda.value() == c64(0.0, 0.0) {
        Formula::Zero
    } else {
        Formula::StripShear { lambda, height }
    };
    BeltramiField::from_pieces(domain.clone(), vec![Piece { region: domain, formula, exclude: vec![] }])
}

/// The shear family on `inner < |z| < 1`.
pub fn annulus_family(lambda: LambdaParam, inner: f64) -> Result<BeltramiField> {
    Region::Annulus { inner }.validate()?;
    let f = ring_family(lambda, c64(0.0, 0.0), inner, 1.0)?;
    Ok(BeltramiField { domain: Region::Annulus { inner }, ..f })
}

/// The shear family on a general ring `inner < |z - center| < outer`.
pub fn ring_family(lambda: LambdaParam, center: C64, inner: f64, outer: f64) -> Result<BeltramiField> {
    let domain = Region::Ring { center, inner, outer };
    domain.validate()?;
    let formula = if lambda.value() == c64(0.0, 0.0) {
        Formula::Zero
    } else {
        Formula::AnnulusShear { lambda, center, inner, outer }
    };
    BeltramiField::from_pieces(domain.clone(), vec![Piece { region: domain, formula, exclude: vec![] }])
}

/// Pushforward of the strip family to the slit disk of half-length `t`.
pub fn disk_family(lambda: LambdaParam, half_length: f64) -> Result<BeltramiField> {
    placed_disk_family(lambda, half_length, c64(0.0, 0.0), 1.0)
}

/// [`disk_family`] transported to the disk `|z - center| < scale`.
pub fn placed_disk_family(lambda: LambdaParam, half_length: f64, center: C64, scale: f64) -> Result<BeltramiField> {
    EllipticCoverData::new(half_length)?;
    let domain = if center == c64(0.0, 0.0) && scale == 1.0 {
        Region::SlitDisk { half_length }
    } else {
        Region::Disk { center, radius: scale }
    };
    domain.validate()?;
    let formula = if lambda.value() == c64(0.0, 0.0) {
        Formula::Zero
    } else {
        Formula::SlitDiskShear { lambda, half_length, center, scale }
    };
    BeltramiField::from_pieces(domain.clone(), vec![Piece { region: domain, formula, exclude: vec![] }])
}

/// Coefficient of the radial stretch `c + w |w|^(K-1)` on `|w| < radius`,
/// `w = z - c`; the map is the identity outside after rescaling.
pub fn radial_stretch(dilatation: f64, center: C64, radius: f64) -> Result<BeltramiField> {
    if !(dilatation >= 1.0) || !dilatation.is_finite() {
        return Err(Error::invalid(format!("radial dilatation {dilatation} must be finite and >= 1")));
    }
    let domain = Region::Disk { center, radius };
    domain.validate()?;
    let coef = (dilatation - 1.0) / (dilatation + 1.0);
    let formula = if coef == 0.0 { Formula::Zero } else { Formula::Radial { coef, center } };
    BeltramiField::from_pieces(domain.clone(), vec![Piece { region: domain, formula, exclude: vec![] }])
}

/// The weighted field on `C \ Z`.
pub fn example1_field(k: f64, weights: WeightSequences, basis: QsBasis) -> Result<BeltramiField> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("dilatation constant {k} outside [0, 1)")));
    }
    let domain = Region::PlaneMinusIntegers;
    let formula = if k == 0.0 { Formula::Zero } else { Formula::Weighted { k, weights, basis } };
    BeltramiField::from_pieces(domain.clone(), vec![Piece { region: domain, formula, exclude: vec![] }])
}

/// `z -> μ(z + n step)` times the (trivial) twist factor of the translation.
pub fn deck_twist(mu: &BeltramiField, deck: &CoveringMap, n: i64) -> Result<BeltramiField> {
    let CoveringMap::TranslationDeck { step } = deck else {
        return Err(Error::invalid("deck twist needs a translation deck"));
    };
    if n == 0 {
        return Ok(mu.clone());
    }
    pullback(mu, &CoveringMap::TranslationDeck { step: step * n as f64 })
}

/// `mu` on the bounded `window` and zero outside it; points outside the
/// window leave the domain.
pub fn truncate(mu: &BeltramiField, window: &Region) -> Result<BeltramiField> {
    window.validate()?;
    if window.bounding_box().is_none() {
        return Err(Error::invalid("truncation window must be bounded"));
    }
    check_inside(window, &mu.domain)?;
    Ok(BeltramiField { domain: window.clone(), ..mu.clone() })
}

/// `patch` on `u`, `base` elsewhere.
pub fn glue(base: &BeltramiField, patch: &BeltramiField, u: &Region) -> Result<BeltramiField> {
    if patch.domain != *u {
        return Err(Error::invalid("patch domain must equal the glued region"));
    }
    check_inside(u, &base.domain)?;
    let mut pieces = patch.pieces.clone();
    for p in &base.pieces {
        let mut q = p.clone();
        q.exclude.push(u.clone());
        pieces.push(q);
    }
    Ok(BeltramiField { domain: base.domain.clone(), pieces, bound: base.bound.max(patch.bound) })
}

pub(crate) fn check_inside(u: &Region, outer: &Region) -> Result<()> {
    u.validate()?;
    let Some(bb) = u.bounding_box() else {
        if u == outer {
            return Ok(());
        }
        return Err(Error::invalid("glued region must be bounded"));
    };
    let mut s = Sampler::new(0x5eed);
    for _ in 0..512 {
        let z = s.in_region(u, bb);
        if !outer.contains(z) {
            return Err(Error::invalid(format!("glued region leaves the base domain at {z}")));
        }
    }
    Ok(())
}

/// `μ̂ = μ∘π · conj(π')/π'` on the covering domain.
pub fn pullback(mu: &BeltramiField, cover: &CoveringMap) -> Result<BeltramiField> {
    if *cover == CoveringMap::Identity {
        return Ok(mu.clone());
    }
    let domain = preimage_domain(cover, &mu.domain)?;
    Ok(BeltramiField {
        pieces: vec![Piece {
            region: domain.clone(),
            formula: Formula::Pullback { inner: Box::new(mu.clone()), cover: cover.clone() },
            exclude: vec![],
        }],
        domain,
        bound: mu.bound,
    })
}

/// The region the covering maps onto `target`.
pub fn preimage_domain(cover: &CoveringMap, target: &Region) -> Result<Region> {
    let unsupported = || Err(Error::invalid(format!("no preimage of {target:?} under {cover:?}")));
    match cover {
        CoveringMap::Identity => Ok(target.clone()),
        CoveringMap::ExpCover => match target {
            Region::Annulus { inner } if *inner > 0.0 => Ok(Region::Strip { height: -inner.ln() }),
            Region::Annulus { .. } => Ok(Region::Strip { height: f64::INFINITY }),
            _ => unsupported(),
        },
        CoveringMap::EllipticCover { half_length, height } => match target {
            Region::SlitDisk { half_length: t } if t == half_length => Ok(Region::Strip { height: *height }),
            _ => unsupported(),
        },
        CoveringMap::TranslationDeck { step } => translate(target, -*step).map_or_else(unsupported, Ok),
        CoveringMap::Affine { center, scale } => {
            let inv = |z: C64| (z - center) / scale;
            match target {
                Region::Disk { center: c, radius } => Ok(Region::Disk { center: inv(*c), radius: radius / scale }),
                Region::UnitDisk => Ok(Region::Disk { center: inv(c64(0.0, 0.0)), radius: 1.0 / scale }),
                Region::Ring { center: c, inner, outer } => {
                    Ok(Region::Ring { center: inv(*c), inner: inner / scale, outer: outer / scale })
                }
                _ => unsupported(),
            }
        }
    }
}

fn translate(r: &Region, dx: f64) -> Option<Region> {
    let d = c64(dx, 0.0);
    Some(match r {
        Region::Strip { .. } => r.clone(),
        Region::PlaneMinusIntegers if dx.fract() == 0.0 => r.clone(),
        Region::Cell { period, index } if (dx / period).fract() == 0.0 => {
            Region::Cell { period: *period, index: index + (dx / period) as i64 }
        }
        Region::Ring { center, inner, outer } => Region::Ring { center: center + d, inner: *inner, outer: *outer },
        Region::Disk { center, radius } => Region::Disk { center: center + d, radius: *radius },
        Region::Rectangle { x0, x1, y0, y1 } => Region::Rectangle { x0: x0 + dx, x1: x1 + dx, y0: *y0, y1: *y1 },
        Region::Union { parts } => Region::Union {
            parts: parts.iter().map(|p| translate(p, dx)).collect::<Option<Vec<_>>>()?,
        },
        _ => return None,
    })
}

#[cfg(test)]
mod tests;
