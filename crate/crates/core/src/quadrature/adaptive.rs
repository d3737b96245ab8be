//! Adaptive quad-tree integration over parameter patches.

use serde::{Deserialize, Serialize};

use super::gauss;
use super::patches::{self, Patch, Rect};
use crate::par::{self, Exec};
use crate::{c64, Error, Result, C64};

const ORDER: usize = 8;

/// A declared integrable singularity `|z - location|^-order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub location: C64,
    pub order: f64,
}

impl Singularity {
    pub fn simple_pole(location: C64) -> Self {
        Singularity { location, order: 1.0 }
    }
}

/// Algebraic decay `|f(z)| <= coef |z|^-degree` used to bound the part of the
/// plane dropped by truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub coef: f64,
    pub degree: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub singularities: Vec<Singularity>,
    /// Leaf budget before giving up.
    pub max_cells: usize,
    /// Cells on each side of the origin kept for `PlaneMinusIntegers`.
    pub plane_truncation: usize,
    pub decay: Option<Decay>,
    pub exec: Exec,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-8,
            singularities: Vec::new(),
            max_cells: 400_000,
            plane_truncation: 64,
            decay: None,
            exec: Exec::default(),
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions { tol, ..Default::default() }
    }

    pub fn singular_at(mut self, points: impl IntoIterator<Item = C64>) -> Self {
        self.singularities.extend(points.into_iter().map(Singularity::simple_pole));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: C64,
    pub error_estimate: f64,
    pub cells_used: usize,
}

/// `∫∫ f dx dy` over `region` with the simple-signature defaults.
pub fn integrate2d<F>(
    region: &crate::domains::Region,
    f: F,
    tol: f64,
    singularities: &[Singularity],
) -> Result<QuadratureResult>
where
    F: Fn(C64) -> C64 + Sync,
{
    let opts = QuadOptions { tol, singularities: singularities.to_vec(), ..Default::default() };
    integrate2d_with(region, f, &opts)
}

struct Leaf {
    patch: usize,
    rect: Rect,
    value: C64,
    err: f64,
    kids: [C64; 4],
}

fn leaf<F>(patches: &[Patch], patch: usize, rect: Rect, coarse: C64, points: &[C64], f: &F) -> Result<Leaf>
where
    F: Fn(C64) -> C64,
{
    let mut kids = [C64::new(0.0, 0.0); 4];
    for (v, k) in kids.iter_mut().zip(&rect.split4()) {
        *v = rule(&patches[patch], k, points, f)?;
    }
    let value = par::pairwise_sum(&kids);
    Ok(Leaf { patch, rect, value, err: (value - coarse).norm(), kids })
}

/// Heap key: largest error first, ties broken by creation order.
#[derive(PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(other.1.cmp(&self.1))
    }
}

/// Full-control form of [`integrate2d`]. Refinement is global: the leaves
/// with the largest error estimates are split until the summed estimate
/// meets the tolerance.
pub fn integrate2d_with<F>(
    region: &crate::domains::Region,
    f: F,
    opts: &QuadOptions,
) -> Result<QuadratureResult>
where
    F: Fn(C64) -> C64 + Sync,
{
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if let Some(s) = opts.singularities.iter().find(|s| s.order > 1.0) {
        return Err(Error::invalid(format!(
            "singularity of order {} at {} is not accepted (order must be <= 1)",
            s.order, s.location
        )));
    }
    let patches = patches::patches(region, opts.plane_truncation)?;
    let points: Vec<C64> = opts.singularities.iter().map(|s| s.location).collect();
    let cells: Vec<(usize, Rect)> = patches
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.initial_cells(&points).into_iter().map(move |r| (i, r)))
        .collect();
    let first: Vec<Result<Leaf>> = par::map_slice(opts.exec, &cells, |&(i, r)| {
        let coarse = rule(&patches[i], &r, &points, &f)?;
        leaf(&patches, i, r, coarse, &points, &f)
    });
    let mut leaves: Vec<Leaf> = Vec::with_capacity(first.len());
    for l in first {
        leaves.push(l?);
    }
    let mut heap: std::collections::BinaryHeap<(Key, usize)> = leaves
        .iter()
        .enumerate()
        .map(|(i, l)| (Key(l.err, i), i))
        .collect();
    let mut alive = vec![true; leaves.len()];
    let tail = match (region, opts.decay) {
        (crate::domains::Region::PlaneMinusIntegers, Some(d)) => {
            plane_tail_bound(d, 3.0 * (opts.plane_truncation as f64 + 1.0))?
        }
        _ => 0.0,
    };
    loop {
        let live: Vec<usize> = (0..leaves.len()).filter(|&i| alive[i]).collect();
        let errs: Vec<f64> = live.iter().map(|&i| leaves[i].err).collect();
        let vals: Vec<C64> = live.iter().map(|&i| leaves[i].value).collect();
        let err = par::pairwise_sum_f64(&errs);
        let value = par::pairwise_sum(&vals);
        let mass: f64 = vals.iter().map(|v| v.norm()).sum();
        let floor = 64.0 * f64::EPSILON * mass;
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite("quadrature sum".into()));
        }
        if err <= opts.tol.max(floor) {
            return Ok(QuadratureResult { value, error_estimate: err + tail, cells_used: live.len() });
        }
        if live.len() >= opts.max_cells {
            return Err(Error::QuadratureNoConvergence {
                value_re: value.re,
                value_im: value.im,
                error_estimate: err + tail,
                cells: live.len(),
            });
        }
        // Split the worst leaves in one parallel batch.
        let batch = (live.len() / 8).clamp(1, 256);
        let mut picked = Vec::with_capacity(batch);
        while picked.len() < batch {
            match heap.pop() {
                Some((_, i)) => picked.push(i),
                None => break,
            }
        }
        let jobs: Vec<(usize, Rect, C64)> = picked
            .iter()
            .flat_map(|&i| {
                let l = &leaves[i];
                l.rect.split4().into_iter().zip(l.kids).map(move |(r, c)| (l.patch, r, c))
            })
            .collect();
        let fresh: Vec<Result<Leaf>> =
            par::map_slice(opts.exec, &jobs, |&(p, r, c)| leaf(&patches, p, r, c, &points, &f));
        for i in picked {
            alive[i] = false;
        }
        for l in fresh {
            let l = l?;
            let id = leaves.len();
            heap.push((Key(l.err, id), id));
            leaves.push(l);
            alive.push(true);
        }
    }
}

/// Bound on `∫∫_{|Re z| > x} coef |z|^-degree dx dy`.
pub fn plane_tail_bound(d: Decay, x: f64) -> Result<f64> {
    if d.degree <= 2.0 {
        return Err(Error::invalid("decay degree must exceed 2 for a finite tail"));
    }
    // ∫ (x² + y²)^{-d/2} dy = x^{1-d} ∫_{-π/2}^{π/2} cos^{d-2} θ dθ
    let beta: f64 = gauss::integrate(
        |t: f64| t.cos().powf(d.degree - 2.0),
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
        48,
    );
    Ok(2.0 * d.coef * beta * x.powf(2.0 - d.degree) / (d.degree - 2.0))
}

/// Tensor Gauss on a regular cell, Duffy triangles around a singular one.
fn rule<F>(patch: &Patch, rect: &Rect, points: &[C64], f: &F) -> Result<C64>
where
    F: Fn(C64) -> C64,
{
    let mut acc = C64::new(0.0, 0.0);
    let mut bad = None;
    for_each_node(patch, rect, points, ORDER, |z, w| {
        let v = f(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            bad = Some(z);
        }
        acc += v * w;
    });
    match bad {
        Some(z) => Err(Error::NonFinite(format!("integrand at {z}"))),
        None => Ok(acc),
    }
}

/// Visits the physical nodes and weights of the cell rule.
pub(crate) fn for_each_node(
    patch: &Patch,
    rect: &Rect,
    points: &[C64],
    order: usize,
    mut visit: impl FnMut(C64, f64),
) {
    match patch.singular_near(rect, points) {
        None => {
            let (x, w) = gauss::legendre(order);
            let hu = 0.5 * (rect.u1 - rect.u0);
            let hv = 0.5 * (rect.v1 - rect.v0);
            let mu = 0.5 * (rect.u0 + rect.u1);
            let mv = 0.5 * (rect.v0 + rect.v1);
            for (xj, wj) in x.iter().zip(w) {
                let v = mv + hv * xj;
                for (xi, wi) in x.iter().zip(w) {
                    let (z, jac) = patch.map.apply(mu + hu * xi, v);
                    visit(z, wi * wj * hu * hv * jac);
                }
            }
        }
        Some(s) => {
            // The relative accuracy of this rule does not improve under
            // refinement (the singularity is scale invariant), so it runs at
            // twice the regular order.
            let (x, w) = gauss::legendre(2 * order);
            // Polar coordinates about `s` on each triangle (s, a, b): the
            // angular variable keeps the rule accurate when `s` sits close to
            // an edge, and `r dr` absorbs a `1/r` singularity.
            let corners = [
                (rect.u0, rect.v0),
                (rect.u1, rect.v0),
                (rect.u1, rect.v1),
                (rect.u0, rect.v1),
            ];
            let size = (rect.u1 - rect.u0).max(rect.v1 - rect.v0);
            for k in 0..4 {
                let a = corners[k];
                let b = corners[(k + 1) % 4];
                let da = (a.0 - s.0, a.1 - s.1);
                let db = (b.0 - s.0, b.1 - s.1);
                let cross = da.0 * db.1 - da.1 * db.0;
                let dot = da.0 * db.0 + da.1 * db.1;
                let sweep = cross.atan2(dot);
                let e = (b.0 - a.0, b.1 - a.1);
                let elen = e.0.hypot(e.1);
                // signed distance from s to the edge line along its normal
                let normal = (e.1 / elen, -e.0 / elen);
                let h = normal.0 * da.0 + normal.1 * da.1;
                if sweep.abs() < 1e-14 || h.abs() < 1e-13 * size {
                    continue;
                }
                let th0 = da.1.atan2(da.0);
                for (xj, wj) in x.iter().zip(w) {
                    let th = th0 + 0.5 * sweep * (xj + 1.0);
                    let dir = (th.cos(), th.sin());
                    let rmax = h / (normal.0 * dir.0 + normal.1 * dir.1);
                    for (xi, wi) in x.iter().zip(w) {
                        let r = 0.5 * rmax * (xi + 1.0);
                        let (z, jac) = patch.map.apply(s.0 + r * dir.0, s.1 + r * dir.1);
                        visit(z, 0.25 * wi * wj * sweep * rmax * r * jac);
                    }
                }
            }
        }
    }
}

/// A precomputed node set: `∫∫ f ≈ Σ w_k f(z_k)`.
#[derive(Debug, Clone, Default)]
pub struct FixedRule {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
}

impl FixedRule {
    /// Uniform quad-tree refinement of `depth` levels below the initial
    /// subdivision of every patch, Duffy-regularised at `singular`.
    pub fn build(
        region: &crate::domains::Region,
        singular: &[C64],
        depth: u32,
        order: usize,
    ) -> Result<Self> {
        let patches = patches::patches(region, 64)?;
        let mut rule = FixedRule::default();
        for p in &patches {
            let mut cells = p.initial_cells(singular);
            for _ in 0..depth {
                cells = cells.iter().flat_map(|r| r.split4()).collect();
            }
            for r in &cells {
                for_each_node(p, r, singular, order, |z, w| {
                    rule.nodes.push(z);
                    rule.weights.push(w);
                });
            }
        }
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k g(k, z_k)` with a deterministic reduction.
    pub fn apply(&self, exec: Exec, g: impl Fn(usize, C64) -> C64 + Sync + Send) -> C64 {
        const CHUNK: usize = 4096;
        let nchunks = self.nodes.len().div_ceil(CHUNK);
        let parts = par::map_range(exec, nchunks, |c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(self.nodes.len());
            let mut s = c64(0.0, 0.0);
            for k in lo..hi {
                s += g(k, self.nodes[k]) * self.weights[k];
            }
            s
        });
        par::pairwise_sum(&parts)
    }
}
