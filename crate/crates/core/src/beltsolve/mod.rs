//! Grid solver for `f_z̄ = μ f_z` with compactly supported `μ`.
//!
//! The map is written `f = z + C[h]` with `h = f_z̄`, which turns the equation
//! into `h = μ + μ S[h]`; `S` and `C` are applied as Fourier multipliers on a
//! zero-padded grid and the fixed point is found by Neumann iteration, which
//! contracts with factor `‖μ‖∞`.

mod io;
mod spectral;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use io::{read_qcgrid, write_qcgrid, QCGRID_MAGIC, QCGRID_VERSION};
pub use spectral::Spectral;

use crate::domains::Region;
use crate::fields::{BeltramiField, Formula};
use crate::par::Exec;
use crate::{c64, Error, Result, C64};

/// Axis-aligned square `[x0, x0 + side] x [y0, y0 + side]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquareBox {
    pub x0: f64,
    pub y0: f64,
    pub side: f64,
}

impl SquareBox {
    pub fn centered(center: C64, half: f64) -> Self {
        SquareBox { x0: center.re - half, y0: center.im - half, side: 2.0 * half }
    }

    /// Smallest centred box with the given margin factor around a hull.
    pub fn around(hull: (f64, f64, f64, f64), margin: f64) -> Self {
        let c = c64((hull.0 + hull.1) / 2.0, (hull.2 + hull.3) / 2.0);
        let ext = (hull.1 - hull.0).max(hull.3 - hull.2);
        SquareBox::centered(c, margin * ext / 2.0)
    }

    pub fn spacing(&self, n: usize) -> f64 {
        self.side / n as f64
    }

    /// Node `(row, col)`; nodes sit at cell centres.
    pub fn node(&self, n: usize, row: usize, col: usize) -> C64 {
        let h = self.spacing(n);
        c64(self.x0 + (col as f64 + 0.5) * h, self.y0 + (row as f64 + 0.5) * h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub n: usize,
    pub bbox: SquareBox,
    pub tol: f64,
    pub max_iter: usize,
    /// Sub-samples per cell side when averaging `μ` onto the grid.
    pub supersample: usize,
    /// Apply the affine normalisation fixing 0 and 1. Off by default: the
    /// principal solution with `f(z) - z → 0` is returned as is.
    pub normalize: bool,
    pub exec: Exec,
}

impl SolveOptions {
    pub fn new(n: usize, bbox: SquareBox) -> Self {
        SolveOptions { n, bbox, tol: 1e-10, max_iter: 200, supersample: 8, normalize: false, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖h_{m+1} - h_m‖₂` per iteration.
    pub residuals: Vec<f64>,
    /// Successive residual ratios.
    pub ratios: Vec<f64>,
    pub sup_mu: f64,
    /// `max |f - z|` on the box boundary.
    pub boundary_deviation: f64,
    /// `max(|f(0)|, |f(1) - 1|)` before any normalisation.
    pub anchor_deviation: f64,
    /// Whether the affine normalisation fixing 0 and 1 was applied.
    pub normalized: bool,
}

/// A solved map sampled on the grid nodes, row-major with rows along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGrid {
    pub n: usize,
    pub bbox: SquareBox,
    pub f: Vec<C64>,
    pub fz: Vec<C64>,
    pub fzbar: Vec<C64>,
    pub stats: SolveStats,
    /// The solved density, when the grid comes from [`solve`]; enables exact
    /// evaluation off the nodes.
    pub density: Option<Arc<Density>>,
}

/// `f_z̄` of a solved map: cellwise constant, with cut cells resolved into
/// sub-cells. `f = z + C[density]`, followed by `(f - shift) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    n: usize,
    bbox: SquareBox,
    h: Vec<C64>,
    cut: Vec<(usize, Vec<(C64, C64)>)>,
    sub_side: f64,
    shift: C64,
    scale: C64,
}

fn rect_integral(w: C64, half: f64) -> C64 {
    spectral::cell_inv(w.re - half, w.re + half, w.im - half, w.im + half)
}

impl Density {
    /// Change of `C[h](p)` from resolving the cut cells, times `-π`.
    fn cut_term(&self, i: usize, subs: &[(C64, C64)], p: C64) -> C64 {
        let zc = self.bbox.node(self.n, i / self.n, i % self.n);
        let mut d = -self.h[i] * rect_integral(zc - p, 0.5 * self.bbox.spacing(self.n));
        for (z, v) in subs {
            d += v * rect_integral(z - p, 0.5 * self.sub_side);
        }
        d
    }

    /// The map at an arbitrary point, by direct summation.
    pub fn eval(&self, p: C64, exec: Exec) -> C64 {
        let n = self.n;
        let hs = self.bbox.spacing(n);
        let rows = crate::par::map_range(exec, n, |r| {
            let mut acc = c64(0.0, 0.0);
            for c in 0..n {
                let v = self.h[r * n + c];
                if v != c64(0.0, 0.0) {
                    acc += v * rect_integral(self.bbox.node(n, r, c) - p, 0.5 * hs);
                }
            }
            acc
        });
        let mut acc = crate::par::pairwise_sum(&rows);
        for (i, subs) in &self.cut {
            acc += self.cut_term(*i, subs, p);
        }
        (p - acc / std::f64::consts::PI - self.shift) / self.scale
    }

    /// Applies the cut-cell correction to `z + C[h]` sampled on the nodes.
    fn refine_nodes(&self, f: &mut [C64], radius: usize) {
        let n = self.n;
        for (i, subs) in &self.cut {
            let (r, c) = (i / n, i % n);
            for rr in r.saturating_sub(radius)..(r + radius + 1).min(n) {
                for cc in c.saturating_sub(radius)..(c + radius + 1).min(n) {
                    f[rr * n + cc] -= self.cut_term(*i, subs, self.bbox.node(n, rr, cc)) / std::f64::consts::PI;
                }
            }
        }
    }
}

/// Bounding box of the pieces carrying a nonzero formula.
pub fn support_hull(mu: &BeltramiField) -> Result<Option<(f64, f64, f64, f64)>> {
    let mut hull: Option<(f64, f64, f64, f64)> = None;
    for p in &mu.pieces {
        if matches!(p.formula, Formula::Zero) {
            continue;
        }
        let b = match (p.region.bounding_box(), mu.domain.bounding_box()) {
            (Some(a), Some(d)) => (a.0.max(d.0), a.1.min(d.1), a.2.max(d.2), a.3.min(d.3)),
            (Some(a), None) => a,
            (None, Some(d)) => d,
            (None, None) => return Err(Error::invalid("the grid solver needs compactly supported coefficients")),
        };
        if b.0 >= b.1 || b.2 >= b.3 {
            continue;
        }
        hull = Some(match hull {
            None => b,
            Some(h) => (h.0.min(b.0), h.1.max(b.1), h.2.min(b.2), h.3.max(b.3)),
        });
    }
    Ok(hull)
}

/// Explicit normalised solution for the single-piece fields that have one:
/// the radial stretch on a disk and the ring shear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormMap {
    Radial { center: C64, radius: f64, dilatation: f64 },
    RingShear { center: C64, inner: f64, outer: f64, lambda: C64 },
}

impl ClosedFormMap {
    pub fn of(mu: &BeltramiField) -> Option<Self> {
        let live: Vec<_> = mu.pieces.iter().filter(|p| !matches!(p.formula, Formula::Zero)).collect();
        let [p] = live.as_slice() else { return None };
        if !p.exclude.is_empty() {
            return None;
        }
        match (&p.formula, &p.region) {
            (Formula::Radial { coef, center }, Region::Disk { center: c, radius }) if c == center => {
                Some(ClosedFormMap::Radial { center: *center, radius: *radius, dilatation: (1.0 + coef) / (1.0 - coef) })
            }
            (Formula::AnnulusShear { lambda, center, inner, outer }, _) => {
                Some(ClosedFormMap::RingShear { center: *center, inner: *inner, outer: *outer, lambda: lambda.value() })
            }
            _ => None,
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match *self {
            ClosedFormMap::Radial { center, radius, dilatation } => {
                let w = z - center;
                if w.norm() >= radius {
                    return z;
                }
                center + w * (w.norm() / radius).powf(dilatation - 1.0)
            }
            ClosedFormMap::RingShear { center, inner, outer, lambda } => {
                let w = z - center;
                let m = w.norm();
                if m >= outer || m <= inner {
                    return z;
                }
                let eta = (outer / m).ln();
                let r = (outer / inner).ln();
                center + w * (C64::i() * lambda * eta.min(r - eta)).exp()
            }
        }
    }

    /// Largest `|f - oracle|` over the grid nodes.
    pub fn max_grid_error(&self, g: &MapGrid) -> f64 {
        let n = g.n;
        g.f.iter().enumerate().map(|(i, w)| (w - self.eval(g.node(i / n, i % n))).norm()).fold(0.0, f64::max)
    }
}

pub fn solve(mu: &BeltramiField, n: usize, bbox: SquareBox, tol: f64, max_iter: usize) -> Result<MapGrid> {
    solve_with(mu, &SolveOptions { tol, max_iter, ..SolveOptions::new(n, bbox) })
}

pub fn solve_with(mu: &BeltramiField, opts: &SolveOptions) -> Result<MapGrid> {
    let n = opts.n;
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::invalid(format!("grid size {n} must be a power of two >= 8")));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 || opts.supersample == 0 {
        return Err(Error::invalid("solver needs tol > 0, max_iter > 0, supersample > 0"));
    }
    let k = mu.sup_norm();
    if !(k < 1.0) {
        return Err(Error::invalid(format!("sup norm {k} is not below 1")));
    }
    let b = opts.bbox;
    if !(b.side > 0.0) {
        return Err(Error::invalid("box side must be positive"));
    }
    if let Some(hull) = support_hull(mu)? {
        let ext = (hull.1 - hull.0).max(hull.3 - hull.2);
        let inside = hull.0 >= b.x0 && hull.1 <= b.x0 + b.side && hull.2 >= b.y0 && hull.3 <= b.y0 + b.side;
        if !inside || b.side < 2.0 * ext * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "box {b:?} must contain the support {hull:?} with margin factor 2"
            )));
        }
    }
    let mug = MuGrid::sample(mu, n, &b, opts.supersample, opts.exec)?;
    let h = b.spacing(n);
    let spec = Spectral::new(n, h, opts.exec);

    let mut stats = SolveStats { sup_mu: k, ..Default::default() };
    let mut hcur = vec![c64(0.0, 0.0); n * n];
    let mut converged = false;
    for it in 0..opts.max_iter {
        let next = if it == 0 { mug.apply(None) } else { mug.apply(Some(&spec.beurling(&hcur))) };
        let res = next.iter().zip(&hcur).map(|(a, c)| (a - c).norm_sqr()).sum::<f64>().sqrt() * h;
        if let Some(&prev) = stats.residuals.last() {
            stats.ratios.push(if prev > 0.0 { res / prev } else { 0.0 });
        }
        stats.residuals.push(res);
        stats.iterations = it + 1;
        hcur = next;
        if !res.is_finite() {
            return Err(Error::NonFinite("Neumann iteration diverged".into()));
        }
        if res <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Neumann residual {:.3e} above {:.3e} after {} iterations",
            stats.residuals.last().copied().unwrap_or(f64::NAN),
            opts.tol,
            opts.max_iter
        )));
    }
    let ch = spec.cauchy(&hcur);
    let sh = spec.beurling(&hcur);
    let mut f: Vec<C64> = (0..n * n).map(|i| b.node(n, i / n, i % n) + ch[i]).collect();
    let mut density = mug.density(hcur, &sh, n, &b);
    density.refine_nodes(&mut f, 4);
    let f0 = density.eval(c64(0.0, 0.0), opts.exec);
    let f1 = density.eval(c64(1.0, 0.0), opts.exec);
    stats.anchor_deviation = f0.norm().max((f1 - 1.0).norm());
    if opts.normalize && (f1 - f0).norm() > 0.0 {
        density.shift = f0;
        density.scale = f1 - f0;
        for w in f.iter_mut() {
            *w = (*w - f0) / density.scale;
        }
        stats.normalized = true;
    }
    let mut grid = MapGrid::from_samples(n, b, f)?;
    grid.density = Some(Arc::new(density));
    stats.boundary_deviation = grid.boundary_deviation();
    grid.stats = stats;
    Ok(grid)
}


/// `μ` on the grid. Cells inside one smooth part of the field carry the cell
/// average; cells cut by a discontinuity keep their sub-samples, each paired
/// with the nearest uncut cell of the same part so that `f_z` is read from the
/// correct side of the jump.
struct MuGrid {
    avg: Vec<C64>,
    /// Cut cells: sub-sample centre, `μ` there, and the cell read for `f_z`.
    cut: Vec<(usize, Vec<(C64, C64, usize)>)>,
    /// Sub-sample weight `1/s²` and side `h/s`.
    weight: f64,
    sub_side: f64,
}

type Label = Option<(usize, usize)>;

impl MuGrid {
    fn sample(mu: &BeltramiField, n: usize, b: &SquareBox, s: usize, exec: Exec) -> Result<Self> {
        let h = b.spacing(n);
        let hull = support_hull(mu)?;
        let label = |z: C64| -> Label { mu.part_at(z) };
        let w = 1.0 / (s * s) as f64;
        // per cell: Ok(label, avg) when uncut, Err(sub-samples) when cut
        type Cell = std::result::Result<(Label, C64), Vec<(C64, Label, C64)>>;
        let rows = crate::par::map_range(exec, n, |r| -> Result<Vec<Cell>> {
            let mut out = Vec::with_capacity(n);
            for c in 0..n {
                let z0 = b.node(n, r, c);
                let near = hull.is_some_and(|hl| {
                    z0.re + h >= hl.0 && z0.re - h <= hl.1 && z0.im + h >= hl.2 && z0.im - h <= hl.3
                });
                if !near {
                    out.push(Ok((None, c64(0.0, 0.0))));
                    continue;
                }
                let mut subs = Vec::with_capacity(s * s);
                for a in 0..s {
                    for bb in 0..s {
                        let z = z0 + c64(((bb as f64 + 0.5) / s as f64 - 0.5) * h, ((a as f64 + 0.5) / s as f64 - 0.5) * h);
                        let l = label(z);
                        let v = if l.is_some() { mu.eval(z)? } else { c64(0.0, 0.0) };
                        subs.push((z, l, v));
                    }
                }
                let l0 = subs[0].1;
                if subs.iter().all(|x| x.1 == l0) {
                    let avg = subs.iter().map(|x| x.2).sum::<C64>() * w;
                    out.push(Ok((l0, avg)));
                } else {
                    out.push(Err(subs));
                }
            }
            Ok(out)
        });
        let mut cells = Vec::with_capacity(n * n);
        for r in rows {
            cells.extend(r?);
        }
        let mut avg = vec![c64(0.0, 0.0); n * n];
        let mut cut = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            match cell {
                Ok((_, v)) => avg[i] = *v,
                Err(subs) => {
                    let (r, c) = (i / n, i % n);
                    let mut terms = Vec::new();
                    for (z, l, v) in subs {
                        if *v == c64(0.0, 0.0) {
                            continue;
                        }
                        let mut best = (f64::INFINITY, i);
                        for rr in r.saturating_sub(2)..(r + 3).min(n) {
                            for cc in c.saturating_sub(2)..(c + 3).min(n) {
                                let j = rr * n + cc;
                                if let Ok((lj, _)) = cells[j] {
                                    if lj == *l {
                                        let d = (b.node(n, rr, cc) - z).norm();
                                        if d < best.0 {
                                            best = (d, j);
                                        }
                                    }
                                }
                            }
                        }
                        terms.push((*z, *v, best.1));
                    }
                    cut.push((i, terms));
                }
            }
        }
        Ok(MuGrid { avg, cut, weight: w, sub_side: h / s as f64 })
    }

    /// `μ (1 + S h)` given `S h`, or `μ` itself.
    fn apply(&self, sh: Option<&[C64]>) -> Vec<C64> {
        let one = c64(1.0, 0.0);
        let mut out: Vec<C64> = match sh {
            None => self.avg.clone(),
            Some(sh) => self.avg.iter().zip(sh).map(|(m, s)| if *m == c64(0.0, 0.0) { *m } else { m * (one + s) }).collect(),
        };
        for (i, terms) in &self.cut {
            out[*i] = terms.iter().map(|(_, v, j)| v * sh.map_or(one, |sh| one + sh[*j])).sum::<C64>() * self.weight;
        }
        out
    }

    /// The solved density: cell values `h`, cut cells resolved with `S h`.
    fn density(&self, h: Vec<C64>, sh: &[C64], n: usize, b: &SquareBox) -> Density {
        let one = c64(1.0, 0.0);
        let cut = self
            .cut
            .iter()
            .map(|(i, terms)| (*i, terms.iter().map(|(z, v, j)| (*z, v * (one + sh[*j]))).collect()))
            .collect();
        Density { n, bbox: *b, h, cut, sub_side: self.sub_side, shift: c64(0.0, 0.0), scale: one }
    }
}

impl MapGrid {
    /// Wraps samples and recomputes the central-difference derivatives.
    pub fn from_samples(n: usize, bbox: SquareBox, f: Vec<C64>) -> Result<Self> {
        if f.len() != n * n || n < 3 {
            return Err(Error::invalid("sample count does not match the grid size"));
        }
        let h = bbox.spacing(n);
        let mut fz = vec![c64(0.0, 0.0); n * n];
        let mut fzbar = vec![c64(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                let (c0, c1) = (c.saturating_sub(1), (c + 1).min(n - 1));
                let (r0, r1) = (r.saturating_sub(1), (r + 1).min(n - 1));
                let fx = (f[r * n + c1] - f[r * n + c0]) / ((c1 - c0) as f64 * h);
                let fy = (f[r1 * n + c] - f[r0 * n + c]) / ((r1 - r0) as f64 * h);
                fz[r * n + c] = (fx - C64::i() * fy) * 0.5;
                fzbar[r * n + c] = (fx + C64::i() * fy) * 0.5;
            }
        }
        Ok(MapGrid { n, bbox, f, fz, fzbar, stats: SolveStats::default(), density: None })
    }

    pub fn node(&self, row: usize, col: usize) -> C64 {
        self.bbox.node(self.n, row, col)
    }

    /// The map at `z`: exact summation when the solved density is attached,
    /// bilinear interpolation otherwise.
    pub fn eval(&self, z: C64) -> Result<C64> {
        match &self.density {
            Some(d) => {
                self.interpolate(z)?;
                Ok(d.eval(z, Exec::default()))
            }
            None => self.interpolate(z),
        }
    }

    /// Bilinear interpolation between the four surrounding nodes.
    pub fn interpolate(&self, z: C64) -> Result<C64> {
        let h = self.bbox.spacing(self.n);
        let u = (z.re - self.bbox.x0) / h - 0.5;
        let v = (z.im - self.bbox.y0) / h - 0.5;
        let top = (self.n - 1) as f64;
        if !(u >= 0.0 && v >= 0.0 && u <= top && v <= top) {
            return Err(Error::out_of_domain(z));
        }
        let c = (u.floor() as usize).min(self.n - 2);
        let r = (v.floor() as usize).min(self.n - 2);
        let (a, b) = (u - c as f64, v - r as f64);
        let n = self.n;
        let f = &self.f;
        Ok(f[r * n + c] * ((1.0 - a) * (1.0 - b))
            + f[r * n + c + 1] * (a * (1.0 - b))
            + f[(r + 1) * n + c] * ((1.0 - a) * b)
            + f[(r + 1) * n + c + 1] * (a * b))
    }

    /// `max |f - z|` over the outermost ring of nodes.
    pub fn boundary_deviation(&self) -> f64 {
        let n = self.n;
        let mut m = 0.0f64;
        for i in 0..n {
            for (r, c) in [(0, i), (n - 1, i), (i, 0), (i, n - 1)] {
                m = m.max((self.f[r * n + c] - self.node(r, c)).norm());
            }
        }
        m
    }

    /// `f_z̄ / f_z` from the finite differences.
    pub fn beltrami(&self) -> Vec<C64> {
        self.fz
            .iter()
            .zip(&self.fzbar)
            .map(|(a, b)| if a.norm() == 0.0 { c64(f64::NAN, f64::NAN) } else { b / a })
            .collect()
    }

    /// Grid `L²` distance between the recovered coefficient and `μ` at the nodes,
    /// over interior nodes whose difference stencil stays in one smooth part
    /// of `μ`.
    pub fn coefficient_l2_error(&self, mu: &BeltramiField) -> Result<f64> {
        let n = self.n;
        let h = self.bbox.spacing(n);
        let bel = self.beltrami();
        let mut s = 0.0;
        for r in 1..n - 1 {
            for c in 1..n - 1 {
                let z = self.node(r, c);
                let l = mu.part_at(z);
                if [c64(h, 0.0), c64(-h, 0.0), c64(0.0, h), c64(0.0, -h)].iter().any(|d| mu.part_at(z + d) != l) {
                    continue;
                }
                let m = if l.is_some() { mu.eval(z)? } else { c64(0.0, 0.0) };
                s += (bel[r * n + c] - m).norm_sqr();
            }
        }
        Ok(s.sqrt() * h)
    }
}

/// Largest `(1 + |μ_f|)/(1 - |μ_f|)` over interior nodes.
pub fn maximal_dilatation(g: &MapGrid) -> Result<f64> {
    let n = g.n;
    let mut k = 1.0f64;
    for r in 1..n - 1 {
        for c in 1..n - 1 {
            let i = r * n + c;
            let (a, b) = (g.fz[i], g.fzbar[i]);
            let jac = a.norm_sqr() - b.norm_sqr();
            if !(jac > 0.0) {
                return Err(Error::NonFinite(format!("Jacobian {jac:.3e} not positive at {}", g.node(r, c))));
            }
            let m = b.norm() / a.norm();
            k = k.max((1.0 + m) / (1.0 - m));
        }
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialityReport {
    pub max_puncture_error: f64,
    pub worst_puncture: Option<C64>,
    /// `max |f(z) - z|` over nodes away from the support.
    pub max_outside_error: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_triviality(mu: &BeltramiField, punctures: &[C64], g: &MapGrid, tol: f64) -> Result<TrivialityReport> {
    let mut worst = 0.0f64;
    let mut worst_p = None;
    for &p in punctures {
        let e = (g.eval(p)? - p).norm();
        if e > worst {
            worst = e;
            worst_p = Some(p);
        }
    }
    let n = g.n;
    let h = g.bbox.spacing(n);
    let hull = support_hull(mu)?;
    let mut outside = 0.0f64;
    for r in 1..n - 1 {
        for c in 1..n - 1 {
            let z = g.node(r, c);
            let away = match hull {
                None => true,
                Some(hl) => {
                    z.re < hl.0 - 2.0 * h || z.re > hl.1 + 2.0 * h || z.im < hl.2 - 2.0 * h || z.im > hl.3 + 2.0 * h
                }
            };
            if away {
                outside = outside.max((g.f[r * n + c] - z).norm());
            }
        }
    }
    Ok(TrivialityReport {
        max_puncture_error: worst,
        worst_puncture: worst_p,
        max_outside_error: outside,
        tol,
        pass: worst <= tol && outside <= tol,
    })
}

#[cfg(test)]
mod tests;
