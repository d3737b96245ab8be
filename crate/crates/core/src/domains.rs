//! Planar regions, covering maps and the cell decomposition under the deck
//! translation `z -> z + p`.

use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticCoverData;
use crate::{c64, Error, Result, C64};

/// Exclusion radius around the punctures of `C \ Z`.
pub const PUNCTURE_EPS: f64 = 1e-9;

/// Regions are closed-form membership predicates; nothing here is meshed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `0 < Im z < height`.
    Strip { height: f64 },
    /// `inner < |z| < 1`.
    Annulus { inner: f64 },
    UnitDisk,
    /// Unit disk with the segment `[-half_length, half_length]` removed.
    SlitDisk { half_length: f64 },
    PlaneMinusIntegers,
    /// `n p < Re z <= (n + 1) p`, punctures removed.
    Cell { period: f64, index: i64 },
    /// `inner < |z - center| < outer`; the general form of [`Region::Annulus`].
    Ring { center: C64, inner: f64, outer: f64 },
    Disk { center: C64, radius: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Union { parts: Vec<Region> },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Region::Strip { height } => *height > 0.0,
            Region::Annulus { inner } => (0.0..1.0).contains(inner),
            Region::UnitDisk | Region::PlaneMinusIntegers => true,
            Region::SlitDisk { half_length } => *half_length > 0.0 && *half_length < 1.0,
            Region::Cell { period, .. } => *period > 0.0,
            Region::Ring { inner, outer, .. } => *inner >= 0.0 && outer > inner,
            Region::Disk { radius, .. } => *radius > 0.0,
            Region::Rectangle { x0, x1, y0, y1 } => x1 > x0 && y1 > y0,
            Region::Union { parts } => {
                for p in parts {
                    p.validate()?;
                }
                !parts.is_empty()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid region parameters: {self:?}")))
        }
    }

    /// Open-region membership; cells use the half-open real interval.
    pub fn contains(&self, z: C64) -> bool {
        match self {
            Region::Strip { height } => z.im > 0.0 && z.im < *height,
            Region::Annulus { inner } => {
                let r = z.norm();
                r > *inner && r < 1.0
            }
            Region::UnitDisk => z.norm() < 1.0,
            Region::SlitDisk { half_length } => {
                z.norm() < 1.0 && !(z.im == 0.0 && z.re.abs() <= *half_length)
            }
            Region::PlaneMinusIntegers => !near_integer(z),
            Region::Cell { period, index } => {
                let lo = *index as f64 * period;
                z.re > lo && z.re <= lo + period && !near_integer(z)
            }
            Region::Ring { center, inner, outer } => {
                let r = (z - center).norm();
                r > *inner && r < *outer
            }
            Region::Disk { center, radius } => (z - center).norm() < *radius,
            Region::Rectangle { x0, x1, y0, y1 } => {
                z.re > *x0 && z.re < *x1 && z.im > *y0 && z.im < *y1
            }
            Region::Union { parts } => parts.iter().any(|p| p.contains(z)),
        }
    }

    /// Axis-aligned bounding box `(x0, x1, y0, y1)`, or `None` when unbounded.
    pub fn bounding_box(&self) -> Option<(f64, f64, f64, f64)> {
        match self {
            Region::Strip { .. } | Region::PlaneMinusIntegers | Region::Cell { .. } => None,
            Region::Annulus { .. } | Region::UnitDisk | Region::SlitDisk { .. } => {
                Some((-1.0, 1.0, -1.0, 1.0))
            }
            Region::Ring { center, outer, .. } => Some((
                center.re - outer,
                center.re + outer,
                center.im - outer,
                center.im + outer,
            )),
            Region::Disk { center, radius } => Some((
                center.re - radius,
                center.re + radius,
                center.im - radius,
                center.im + radius,
            )),
            Region::Rectangle { x0, x1, y0, y1 } => Some((*x0, *x1, *y0, *y1)),
            Region::Union { parts } => {
                let mut bb = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for p in parts {
                    let b = p.bounding_box()?;
                    bb = (bb.0.min(b.0), bb.1.max(b.1), bb.2.min(b.2), bb.3.max(b.3));
                }
                Some(bb)
            }
        }
    }

    /// Exact area when it has a closed form.
    pub fn area(&self) -> Option<f64> {
        use std::f64::consts::PI;
        match self {
            Region::Annulus { inner } => Some(PI * (1.0 - inner * inner)),
            Region::UnitDisk | Region::SlitDisk { .. } => Some(PI),
            Region::Ring { inner, outer, .. } => Some(PI * (outer * outer - inner * inner)),
            Region::Disk { radius, .. } => Some(PI * radius * radius),
            Region::Rectangle { x0, x1, y0, y1 } => Some((x1 - x0) * (y1 - y0)),
            _ => None,
        }
    }
}

fn near_integer(z: C64) -> bool {
    let n = z.re.round();
    (z - c64(n, 0.0)).norm() < PUNCTURE_EPS
}

/// Holomorphic covering (or deck) maps with their complex derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoveringMap {
    Identity,
    /// `zeta -> exp(i zeta)`, strip of height `R` onto the annulus `e^-R < |z| < 1`.
    ExpCover,
    TranslationDeck { step: f64 },
    /// `u -> center + scale u` with real positive scale.
    Affine { center: C64, scale: f64 },
    /// The covering of the slit disk by the strip; `half_length` is the slit
    /// half-length and `height` the matched strip height.
    EllipticCover { half_length: f64, height: f64 },
}

impl CoveringMap {
    pub fn eval(&self, zeta: C64) -> Result<(C64, C64)> {
        match self {
            CoveringMap::Identity => Ok((zeta, c64(1.0, 0.0))),
            CoveringMap::ExpCover => {
                let v = (C64::i() * zeta).exp();
                Ok((v, C64::i() * v))
            }
            CoveringMap::TranslationDeck { step } => Ok((zeta + step, c64(1.0, 0.0))),
            CoveringMap::Affine { center, scale } => Ok((center + zeta * scale, c64(*scale, 0.0))),
            CoveringMap::EllipticCover { half_length, height } => {
                let data = EllipticCoverData::new(*half_length)?;
                if (data.height() - height).abs() > 1e-6 * height.max(1.0) {
                    return Err(Error::invalid(format!(
                        "strip height {height} does not match slit half-length {half_length} (expected {})",
                        data.height()
                    )));
                }
                data.eval_with_derivative(zeta)
            }
        }
    }

    /// Convenience constructor matching a slit to its strip height.
    pub fn elliptic(half_length: f64) -> Result<Self> {
        let data = EllipticCoverData::new(half_length)?;
        Ok(CoveringMap::EllipticCover { half_length, height: data.height() })
    }
}

/// Free-function form of [`CoveringMap::eval`].
pub fn covering_eval(cover: &CoveringMap, zeta: C64) -> Result<(C64, C64)> {
    cover.eval(zeta)
}

/// Free-function form of [`Region::contains`].
pub fn contains(region: &Region, z: C64) -> bool {
    region.contains(z)
}

/// Tiling of `C \ Z` by translates of the base cell `0 < Re z <= period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellDecomposition {
    pub period: f64,
}

impl Default for CellDecomposition {
    fn default() -> Self {
        CellDecomposition { period: 3.0 }
    }
}

impl CellDecomposition {
    pub fn new(period: f64) -> Result<Self> {
        if period > 0.0 {
            Ok(CellDecomposition { period })
        } else {
            Err(Error::invalid("cell period must be positive"))
        }
    }

    pub fn deck(&self) -> CoveringMap {
        CoveringMap::TranslationDeck { step: self.period }
    }

    pub fn cell(&self, n: i64) -> Region {
        Region::Cell { period: self.period, index: n }
    }

    /// Index `n` of the cell containing `z`; punctures are rejected.
    pub fn cell_index(&self, z: C64) -> Result<i64> {
        if near_integer(z) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::out_of_domain(z));
        }
        Ok(cell_index_raw(self.period, z.re))
    }

    /// Membership in `D_n`, the union of cells `0..=n`.
    pub fn in_partial_union(&self, n: i64, z: C64) -> bool {
        match self.cell_index(z) {
            Ok(m) => (0..=n).contains(&m),
            Err(_) => false,
        }
    }
}

/// `n` with `n p < x <= (n+1) p`.
pub(crate) fn cell_index_raw(period: f64, x: f64) -> i64 {
    ((x / period).ceil() - 1.0) as i64
}

/// Free-function form of [`CellDecomposition::cell_index`].
pub fn cell_index(decomp: &CellDecomposition, z: C64) -> Result<i64> {
    decomp.cell_index(z)
}
