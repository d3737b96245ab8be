//! Parameter patches: every supported region is a finite union of rectangles
//! in some parameter plane, mapped to the physical plane with a Jacobian.

use std::f64::consts::TAU;

use crate::domains::Region;
use crate::{c64, Error, Result, C64};

/// Height above which cell patches switch to the algebraic tail map.
pub(crate) const CELL_BAND: f64 = 8.0;
const CELL_Y_BREAKS: [f64; 11] = [-8.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PatchMap {
    Identity,
    /// `z = center + u e^{iv}`.
    Polar { center: C64 },
    /// `z = u + i sign y0 / v` for `v` in `(0, 1]`.
    Tail { y0: f64, sign: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Rect {
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl Rect {
    pub fn split4(&self) -> [Rect; 4] {
        let um = 0.5 * (self.u0 + self.u1);
        let vm = 0.5 * (self.v0 + self.v1);
        [
            Rect { u0: self.u0, u1: um, v0: self.v0, v1: vm },
            Rect { u0: um, u1: self.u1, v0: self.v0, v1: vm },
            Rect { u0: self.u0, u1: um, v0: vm, v1: self.v1 },
            Rect { u0: um, u1: self.u1, v0: vm, v1: self.v1 },
        ]
    }

    /// Closed membership after growing each side by `margin` times its length.
    fn contains_grown(&self, p: (f64, f64), margin: f64) -> bool {
        let eu = (margin + 1e-12) * (self.u1 - self.u0);
        let ev = (margin + 1e-12) * (self.v1 - self.v0);
        p.0 >= self.u0 - eu && p.0 <= self.u1 + eu && p.1 >= self.v0 - ev && p.1 <= self.v1 + ev
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Patch {
    pub map: PatchMap,
    pub rect: Rect,
}

impl PatchMap {
    #[inline]
    pub fn apply(&self, u: f64, v: f64) -> (C64, f64) {
        match *self {
            PatchMap::Identity => (c64(u, v), 1.0),
            PatchMap::Polar { center } => {
                let (s, c) = v.sin_cos();
                (center + c64(u * c, u * s), u)
            }
            PatchMap::Tail { y0, sign } => (c64(u, sign * y0 / v), y0 / (v * v)),
        }
    }

    /// Parameter-plane images of a physical point (two for a polar seam).
    fn locate(&self, z: C64) -> Vec<(f64, f64)> {
        match *self {
            PatchMap::Identity => vec![(z.re, z.im)],
            PatchMap::Polar { center } => {
                let w = z - center;
                let r = w.norm();
                if r < 1e-14 {
                    // The polar Jacobian already absorbs a pole at the center.
                    return vec![];
                }
                let th = w.im.atan2(w.re).rem_euclid(TAU);
                let mut out = vec![(r, th)];
                if th < 1e-12 {
                    out.push((r, TAU));
                }
                if TAU - th < 1e-12 {
                    out.push((r, 0.0));
                }
                out
            }
            PatchMap::Tail { y0, sign } => {
                if z.im * sign > 0.0 {
                    vec![(z.re, y0 / z.im.abs())]
                } else {
                    vec![]
                }
            }
        }
    }
}

impl Patch {
    /// The singular parameter point of `rect` (closed), preferring corners.
    pub fn singular_near(&self, rect: &Rect, points: &[C64]) -> Option<(f64, f64)> {
        let mut best: Option<((f64, f64), f64)> = None;
        for q in points.iter().flat_map(|&p| self.map.locate(p)) {
            if !self.rect.contains_grown(q, 0.0) || !rect.contains_grown(q, 0.0) {
                continue;
            }
            let du = (q.0 - rect.u0).abs().min((q.0 - rect.u1).abs()) / (rect.u1 - rect.u0);
            let dv = (q.1 - rect.v0).abs().min((q.1 - rect.v1).abs()) / (rect.v1 - rect.v0);
            let d = du.hypot(dv);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((q, d));
            }
        }
        best.map(|b| b.0)
    }

    /// Initial subdivision with roughly square physical cells, with grid
    /// lines moved or added so that every singular point inside the patch is
    /// a cell corner. Midpoint refinement then keeps it a corner.
    pub fn initial_cells(&self, points: &[C64]) -> Vec<Rect> {
        let r = self.rect;
        let (nu, nv) = match self.map {
            PatchMap::Identity => {
                let w = r.u1 - r.u0;
                let h = r.v1 - r.v0;
                let n = (w / h).max(h / w).ceil().min(64.0) as usize;
                if w >= h {
                    (2 * n, 2)
                } else {
                    (2, 2 * n)
                }
            }
            PatchMap::Polar { .. } => {
                let arc = r.u1 * (r.v1 - r.v0);
                let width = r.u1 - r.u0;
                let nv = (arc / width).ceil().clamp(8.0, 256.0) as usize;
                (2, nv)
            }
            PatchMap::Tail { .. } => (2, 2),
        };
        let mut ub = breaks(r.u0, r.u1, nu);
        let mut vb = breaks(r.v0, r.v1, nv);
        for q in points.iter().flat_map(|&p| self.map.locate(p)) {
            if r.contains_grown(q, 0.0) {
                insert_break(&mut ub, q.0);
                insert_break(&mut vb, q.1);
            }
        }
        let mut out = Vec::with_capacity((ub.len() - 1) * (vb.len() - 1));
        for v in vb.windows(2) {
            for u in ub.windows(2) {
                out.push(Rect { u0: u[0], u1: u[1], v0: v[0], v1: v[1] });
            }
        }
        out
    }
}

fn breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

/// Moves the nearest interior break onto `x` when it is close, otherwise
/// inserts `x`; endpoints never move.
fn insert_break(b: &mut Vec<f64>, x: f64) {
    let n = b.len();
    let k = b.partition_point(|&y| y < x);
    if (k < n && b[k] == x) || (k > 0 && b[k - 1] == x) {
        return;
    }
    if k == 0 || k == n {
        return;
    }
    let spacing = b[k] - b[k - 1];
    let (near, dist) = if x - b[k - 1] < b[k] - x { (k - 1, x - b[k - 1]) } else { (k, b[k] - x) };
    if dist < 0.25 * spacing && near != 0 && near != n - 1 {
        b[near] = x;
    } else if dist < 1e-12 * spacing {
        // hugging a patch edge: the edge itself is the corner
    } else {
        b.insert(k, x);
    }
}

fn polar(center: C64, inner: f64, outer: f64) -> Patch {
    Patch { map: PatchMap::Polar { center }, rect: Rect { u0: inner, u1: outer, v0: 0.0, v1: TAU } }
}

fn cell_patches(period: f64, index: i64, out: &mut Vec<Patch>) {
    let x0 = index as f64 * period;
    let cols = 6;
    let dx = period / cols as f64;
    for i in 0..cols {
        let (a, b) = (x0 + i as f64 * dx, x0 + (i + 1) as f64 * dx);
        for w in CELL_Y_BREAKS.windows(2) {
            out.push(Patch { map: PatchMap::Identity, rect: Rect { u0: a, u1: b, v0: w[0], v1: w[1] } });
        }
        for sign in [1.0, -1.0] {
            out.push(Patch {
                map: PatchMap::Tail { y0: CELL_BAND, sign },
                rect: Rect { u0: a, u1: b, v0: 0.0, v1: 1.0 },
            });
        }
    }
}

/// Decomposes a region; `plane_cells` bounds the cells used for the plane.
pub(crate) fn patches(region: &Region, plane_cells: usize) -> Result<Vec<Patch>> {
    region.validate()?;
    let mut out = Vec::new();
    push_patches(region, plane_cells, &mut out)?;
    Ok(out)
}

fn push_patches(region: &Region, plane_cells: usize, out: &mut Vec<Patch>) -> Result<()> {
    match region {
        Region::Strip { .. } => {
            return Err(Error::invalid("integrate over one period rectangle of the strip instead"))
        }
        Region::Annulus { inner } => out.push(polar(c64(0.0, 0.0), *inner, 1.0)),
        Region::UnitDisk | Region::SlitDisk { .. } => out.push(polar(c64(0.0, 0.0), 0.0, 1.0)),
        Region::Ring { center, inner, outer } => out.push(polar(*center, *inner, *outer)),
        Region::Disk { center, radius } => out.push(polar(*center, 0.0, *radius)),
        Region::Rectangle { x0, x1, y0, y1 } => out.push(Patch {
            map: PatchMap::Identity,
            rect: Rect { u0: *x0, u1: *x1, v0: *y0, v1: *y1 },
        }),
        Region::Cell { period, index } => cell_patches(*period, *index, out),
        Region::PlaneMinusIntegers => {
            let t = plane_cells as i64;
            for n in -t - 1..=t {
                cell_patches(3.0, n, out);
            }
        }
        Region::Union { parts } => {
            for p in parts {
                push_patches(p, plane_cells, out)?;
            }
        }
    }
    Ok(())
}
