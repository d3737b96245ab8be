//! Trapezoid rules on closed and periodic contours.

use serde::{Deserialize, Serialize};

use crate::{c64, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Contour {
    /// `|z - center| = radius`; the rule returns the `(z - center)^-2` Laurent
    /// coefficient `(1/2πi) ∮ (z - center) h dz`.
    Circle { center: C64, radius: f64 },
    /// `Im z = height` over one period starting at `Re z = 0`; the rule
    /// returns `∫_0^period h(x + i height) dx`.
    Horizontal { height: f64, period: f64 },
}

impl Contour {
    pub fn circle(radius: f64) -> Self {
        Contour::Circle { center: c64(0.0, 0.0), radius }
    }

    pub fn horizontal(height: f64) -> Self {
        Contour::Horizontal { height, period: std::f64::consts::TAU }
    }
}

pub fn contour_fourier<F>(mut f: F, contour: Contour, m: usize) -> Result<C64>
where
    F: FnMut(C64) -> C64,
{
    if m < 16 {
        return Err(Error::invalid(format!("contour rule needs at least 16 nodes, got {m}")));
    }
    let mut acc = Vec::with_capacity(m);
    for k in 0..m {
        let th = std::f64::consts::TAU * k as f64 / m as f64;
        let (z, w) = match contour {
            Contour::Circle { center, radius } => {
                if !(radius > 0.0) {
                    return Err(Error::invalid("circle radius must be positive"));
                }
                let e = C64::from_polar(radius, th);
                (center + e, e * e / m as f64)
            }
            Contour::Horizontal { height, period } => {
                let x = period * k as f64 / m as f64;
                (c64(x, height), c64(period / m as f64, 0.0))
            }
        };
        let v = f(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(format!("contour integrand at {z}")));
        }
        acc.push(v * w);
    }
    Ok(crate::par::pairwise_sum(&acc))
}
