//! Pairings of Beltrami coefficients with quadratic differentials, Hamilton
//! sequences built from cyclic partial sums, and extremality certificates for
//! fields that are asymptotically periodic under the deck translation.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domains::{CellDecomposition, Region};
use crate::elliptic::EllipticCoverData;
use crate::fields::{BeltramiField, Formula};
use crate::par::{self, Exec};
use crate::qdiff::{self, Expr, QuadraticDifferential};
use crate::quadrature::{self, plane_tail_bound, FixedRule, QuadOptions, QuadratureResult};
use crate::sampling::Sampler;
use crate::{c64, Error, Result, C64};

mod audit;
pub use audit::{constants_audit, AnnulusFit, AuditField, AuditOptions, ConstantsAudit, TorusFit};

/// `∫∫_region μ φ dx dy`.
pub fn pairing(mu: &BeltramiField, phi: &QuadraticDifferential, region: &Region, tol: f64) -> Result<C64> {
    Ok(pairing_with_error(mu, phi, region, tol)?.value)
}

/// [`pairing`] with the accumulated quadrature error.
pub fn pairing_with_error(
    mu: &BeltramiField,
    phi: &QuadraticDifferential,
    region: &Region,
    tol: f64,
) -> Result<QuadratureResult> {
    region.validate()?;
    let mut jobs: Vec<(Region, f64, &Formula)> = Vec::new();
    for piece in &mu.pieces {
        if let Some(r) = intersect(&piece.region, region)? {
            jobs.push((r, 1.0, &piece.formula));
        }
        for e in &piece.exclude {
            if let Some(r) = intersect(e, region)? {
                jobs.push((r, -1.0, &piece.formula));
            }
        }
    }
    let jobs: Vec<_> = jobs.into_iter().filter(|j| !matches!(j.2, Formula::Zero)).collect();
    let share = tol / jobs.len().max(1) as f64;
    let mut total = QuadratureResult { value: c64(0.0, 0.0), error_estimate: 0.0, cells_used: 0 };
    for (r, sign, formula) in jobs {
        let part = formula_pairing(formula, phi, &r, share)?;
        total.value += part.value * sign;
        total.error_estimate += part.error_estimate;
        total.cells_used += part.cells_used;
    }
    Ok(total)
}

fn formula_pairing(formula: &Formula, phi: &QuadraticDifferential, region: &Region, tol: f64) -> Result<QuadratureResult> {
    if let Formula::SlitDiskShear { lambda, half_length, center, scale } = formula {
        // Integrate upstairs: the lift of φ against the strip coefficient.
        let whole = Region::Disk { center: *center, radius: *scale };
        let unit = *center == c64(0.0, 0.0) && *scale == 1.0;
        if *region != whole && !(unit && matches!(region, Region::SlitDisk { .. } | Region::UnitDisk)) {
            return Err(Error::invalid("slit-disk pairings are supported over the whole disk only"));
        }
        let data = EllipticCoverData::new(*half_length)?;
        let strip = Formula::StripShear { lambda: *lambda, height: data.height() };
        let rect = Region::Rectangle { x0: 0.0, x1: 2.0 * std::f64::consts::PI, y0: 0.0, y1: data.height() };
        let (c, s) = (*center, *scale);
        let mut total = QuadratureResult { value: c64(0.0, 0.0), error_estimate: 0.0, cells_used: 0 };
        for part in strip.smooth_parts(&rect) {
            let r = quadrature::integrate2d_with(
                &part,
                |zeta| match (strip.eval(zeta), data.eval_with_derivative(zeta)) {
                    (Ok(t), Ok((w, d))) => t * phi.eval(c + w * s) * (d * s) * (d * s),
                    _ => c64(f64::NAN, f64::NAN),
                },
                &QuadOptions::with_tol(tol / 2.0),
            )?;
            total.value += r.value;
            total.error_estimate += r.error_estimate;
            total.cells_used += r.cells_used;
        }
        return Ok(total);
    }
    let mut total = QuadratureResult { value: c64(0.0, 0.0), error_estimate: 0.0, cells_used: 0 };
    let parts = formula.smooth_parts(region);
    for part in &parts {
        let opts = qdiff::norm_options(phi, part, tol / parts.len() as f64);
        let r = quadrature::integrate2d_with(
            part,
            |z| match formula.eval(z) {
                Ok(m) if m == c64(0.0, 0.0) => m,
                Ok(m) => m * phi.eval(z),
                Err(_) => c64(f64::NAN, f64::NAN),
            },
            &opts,
        )?;
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.cells_used += r.cells_used;
    }
    Ok(total)
}

/// `a ∩ b` for the nested or disjoint configurations that occur when pairing
/// glued fields.
fn intersect(a: &Region, b: &Region) -> Result<Option<Region>> {
    if a == b || subset(b, a) {
        return Ok(Some(b.clone()));
    }
    if subset(a, b) {
        return Ok(Some(a.clone()));
    }
    if let (Some(x), Some(y)) = (a.bounding_box(), b.bounding_box()) {
        if x.1 <= y.0 || y.1 <= x.0 || x.3 <= y.2 || y.3 <= x.2 {
            return Ok(None);
        }
    }
    if let (Some(x), Region::Cell { period, index }) = (a.bounding_box(), b) {
        let lo = *index as f64 * period;
        if x.1 <= lo || x.0 >= lo + period {
            return Ok(None);
        }
    }
    Err(Error::invalid(format!("pairing over a partial overlap of {a:?} and {b:?} is not supported")))
}

fn subset(a: &Region, b: &Region) -> bool {
    match (a, b) {
        (Region::Cell { .. }, Region::PlaneMinusIntegers) => true,
        (Region::SlitDisk { half_length }, Region::UnitDisk) => *half_length > 0.0,
        _ => match a.bounding_box() {
            Some(bb) => {
                let mut s = Sampler::new(0xa11);
                (0..256).all(|_| b.contains(s.in_region(a, bb)))
                    && [c64(bb.0, bb.2), c64(bb.1, bb.3)].iter().all(|&z| {
                        // the box corners tell apart a region from a strictly larger one
                        b.contains(z) || !a.contains(z) || b.bounding_box().is_none()
                    })
            }
            None => false,
        },
    }
}

/// Rule on the base cell replicated to every translate.
#[derive(Debug, Clone)]
pub struct CellRule {
    pub period: f64,
    pub rule: FixedRule,
    /// Cells kept beyond each end of the window.
    pub margin: i64,
    pub exec: Exec,
}

impl CellRule {
    pub fn new(decomp: &CellDecomposition, depth: u32, order: usize, margin: i64) -> Result<Self> {
        let p = decomp.period;
        let singular: Vec<C64> = (0..=p.floor() as i64).map(|k| c64(k as f64, 0.0)).collect();
        let rule = FixedRule::build(&decomp.cell(0), &singular, depth, order)?;
        Ok(CellRule { period: p, rule, margin, exec: Exec::default() })
    }

    pub fn standard(decomp: &CellDecomposition) -> Result<Self> {
        Self::new(decomp, 1, 8, 64)
    }
}

/// A normalised partial sum `F_n` and `φ_n = F_n / ‖F_n‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonTerm {
    pub n: i64,
    pub f_n: QuadraticDifferential,
    pub norm: f64,
    pub phi_n: QuadraticDifferential,
    /// Norm of the full cyclic series over one cell.
    pub theta_norm: f64,
}

/// `F_n = (1/‖Θ(f)‖) Σ_{-n <= j <= 0} f∘γ_j` and its normalisation.
pub fn build_hamilton_term(f: &QuadraticDifferential, decomp: &CellDecomposition, n: i64) -> Result<HamiltonTerm> {
    let rule = CellRule::standard(decomp)?;
    build_hamilton_term_with(f, &rule, n)
}

pub fn build_hamilton_term_with(f: &QuadraticDifferential, rule: &CellRule, n: i64) -> Result<HamiltonTerm> {
    if n < 0 {
        return Err(Error::invalid("Hamilton index must be nonnegative"));
    }
    let zero = BeltramiField::zero(Region::PlaneMinusIntegers);
    let sweep = hamilton_sweep(&zero, &QuadraticDifferential::zero(), f, rule, &[n])?;
    let raw = QuadraticDifferential {
        expr: Expr::TranslateSum { inner: Box::new(f.clone()), step: -rule.period, lo: 0, hi: n },
        poles: f
            .poles
            .iter()
            .flat_map(|&(p, o)| (0..=n).map(move |m| (p + rule.period * m as f64, o)))
            .collect(),
        period: None,
        decay: None,
    };
    let f_n = raw.scaled(c64(1.0 / sweep.theta_norm, 0.0));
    let norm = sweep.f_norm[0];
    let phi_n = f_n.scaled(c64(1.0 / norm, 0.0));
    Ok(HamiltonTerm { n, f_n, norm, phi_n, theta_norm: sweep.theta_norm })
}

/// Per-index results of one pass over the cell rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub ns: Vec<i64>,
    pub theta_norm: f64,
    /// `∫_{ω_0} |Θ(f) - φ̃|`, normalised like `F_n`.
    pub theta_defect: f64,
    /// `x_l = ∫_{ω_l} μ φ̃` for `l = 0..=max n`.
    pub cell_pairings: Vec<C64>,
    /// `‖F_n‖` over the whole plane.
    pub f_norm: Vec<f64>,
    /// `∫ μ F_n` over the whole plane.
    pub mu_f: Vec<C64>,
    /// `∫_{outside D_n} μ F_n`.
    pub mu_f_outside: Vec<C64>,
    /// `∫_{D_n} |φ̃ - F_n|`.
    pub defect: Vec<f64>,
    /// Bound on the mass of the dropped far cells.
    pub tail_bound: f64,
}

/// One pass over the replicated cell rule computing every quantity the
/// Hamilton limits need, for each `n` in `ns`.
pub fn hamilton_sweep(
    mu: &BeltramiField,
    phi_tilde: &QuadraticDifferential,
    f: &QuadraticDifferential,
    rule: &CellRule,
    ns: &[i64],
) -> Result<Sweep> {
    if ns.iter().any(|&n| n < 0) {
        return Err(Error::invalid("Hamilton indices must be nonnegative"));
    }
    let decay = f.decay.ok_or_else(|| Error::invalid("preimage needs a declared decay"))?;
    if decay.degree <= 2.0 {
        return Err(Error::invalid("preimage decay must exceed 2"));
    }
    let nmax = ns.iter().copied().max().unwrap_or(0);
    let m = rule.margin;
    let p = rule.period;
    let (lmin, lmax) = (-m, nmax + m);
    let qmin = lmin - nmax - 1;
    let nq = (lmax - qmin + 1) as usize;
    let nl = (lmax - lmin + 1) as usize;
    let kernel = Kernel::of(f, p);
    let nodes = &rule.rule.nodes;
    let weights = &rule.rule.weights;
    const CHUNK: usize = 512;
    let nchunks = nodes.len().div_ceil(CHUNK);

    // Θ(f) over the base cell.
    let theta_parts = par::map_range(rule.exec, nchunks, |c| {
        let mut s = [0.0f64; 2];
        let mut gbuf = Vec::new();
        let mut pre = vec![c64(0.0, 0.0); nq + 1];
        for k in c * CHUNK..((c + 1) * CHUNK).min(nodes.len()) {
            let z = nodes[k];
            kernel.fill(z, p, qmin, lmax, 1.0, &mut gbuf, &mut pre);
            let th = pre[nq];
            s[0] += weights[k] * th.norm();
            s[1] += weights[k] * (th - phi_tilde.eval(z)).norm();
        }
        s
    });
    let theta_norm = par::pairwise_sum_f64(&theta_parts.iter().map(|s| s[0]).collect::<Vec<_>>());
    if !(theta_norm > 0.0) || !theta_norm.is_finite() {
        return Err(Error::NonFinite(format!("cyclic series norm {theta_norm}")));
    }
    let theta_defect = par::pairwise_sum_f64(&theta_parts.iter().map(|s| s[1]).collect::<Vec<_>>());

    let nn = ns.len();
    let ncell = (nmax + 1) as usize;
    // [x_l (ncell) | f_norm | mu_f | mu_f_outside | defect] per chunk
    let parts = par::map_range(rule.exec, nchunks, |c| -> Result<Acc> {
        let mut acc = Acc::new(ncell, nn);
        let mut pre = vec![c64(0.0, 0.0); nq + 1];
        let mut gbuf = Vec::new();
        let mut mus = vec![c64(0.0, 0.0); nl];
        let mut phs = vec![c64(0.0, 0.0); nl];
        for k in c * CHUNK..((c + 1) * CHUNK).min(nodes.len()) {
            let z = nodes[k];
            let w = weights[k];
            kernel.fill(z, p, qmin, lmax, theta_norm, &mut gbuf, &mut pre);
            for (i, l) in (lmin..=lmax).enumerate() {
                let zl = z + p * l as f64;
                mus[i] = mu.eval(zl)?;
                phs[i] = phi_tilde.eval(zl);
            }
            for l in 0..=nmax {
                let i = (l - lmin) as usize;
                acc.x[l as usize] += mus[i] * phs[i] * w;
            }
            for (t, &n) in ns.iter().enumerate() {
                for l in (-m)..=(n + m) {
                    let i = (l - lmin) as usize;
                    // F_n at z + p l sums f over q in [l - n, l]
                    let hi = (l - qmin + 1) as usize;
                    let lo = (l - n - qmin) as usize;
                    let fv = pre[hi] - pre[lo];
                    acc.f_norm[t] += fv.norm() * w;
                    let mf = mus[i] * fv * w;
                    acc.mu_f[t] += mf;
                    if l < 0 || l > n {
                        acc.outside[t] += mf;
                    } else {
                        acc.defect[t] += (phs[i] - fv).norm() * w;
                    }
                }
            }
        }
        Ok(acc)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let mut acc = Acc::new(ncell, nn);
    for a in &parts {
        acc.add(a);
    }
    for v in acc.f_norm.iter().chain(acc.defect.iter()) {
        if !v.is_finite() {
            return Err(Error::NonFinite("Hamilton sweep produced a non-finite value".into()));
        }
    }
    // Each of the n + 1 translates loses at most the mass of f beyond the
    // margin on either side.
    let far = plane_tail_bound(decay, p * (m as f64 - 2.0).max(1.0))?;
    let tail_bound = 2.0 * far * (nmax + 1) as f64 / theta_norm;
    Ok(Sweep {
        ns: ns.to_vec(),
        theta_norm,
        theta_defect: theta_defect / theta_norm,
        cell_pairings: acc.x,
        f_norm: acc.f_norm,
        mu_f: acc.mu_f,
        mu_f_outside: acc.outside,
        defect: acc.defect,
        tail_bound,
    })
}

/// `f(z) = factor Σ_{lo <= i <= hi} g(z - p i)`; partial sums over deck
/// translates of `f` then reduce to prefix sums of `g`.
struct Kernel<'a> {
    g: &'a QuadraticDifferential,
    factor: C64,
    lo: i64,
    hi: i64,
}

impl<'a> Kernel<'a> {
    fn of(f: &'a QuadraticDifferential, p: f64) -> Self {
        if let Expr::Scaled { factor, inner } = &f.expr {
            if let Expr::TranslateSum { inner: g, step, lo, hi } = &inner.expr {
                if *step == -p {
                    return Kernel { g, factor: *factor, lo: *lo, hi: *hi };
                }
            }
        }
        Kernel { g: f, factor: c64(1.0, 0.0), lo: 0, hi: 0 }
    }

    /// `pre[i] = Σ_{qmin <= q < qmin + i} f(z + p q) / scale`.
    fn fill(&self, z: C64, p: f64, qmin: i64, qmax: i64, scale: f64, gbuf: &mut Vec<C64>, pre: &mut [C64]) {
        // g on [qmin - hi, qmax - lo], as prefix sums
        let g0 = qmin - self.hi;
        let len = (qmax - self.lo - g0 + 1) as usize;
        gbuf.clear();
        gbuf.push(c64(0.0, 0.0));
        let mut acc = c64(0.0, 0.0);
        for j in 0..len {
            acc += self.g.eval(z + p * (g0 + j as i64) as f64);
            gbuf.push(acc);
        }
        let c = self.factor / scale;
        pre[0] = c64(0.0, 0.0);
        for (i, q) in (qmin..=qmax).enumerate() {
            let a = (q - self.hi - g0) as usize;
            let b = (q - self.lo - g0 + 1) as usize;
            pre[i + 1] = pre[i] + (gbuf[b] - gbuf[a]) * c;
        }
    }
}

struct Acc {
    x: Vec<C64>,
    f_norm: Vec<f64>,
    mu_f: Vec<C64>,
    outside: Vec<C64>,
    defect: Vec<f64>,
}

impl Acc {
    fn new(ncell: usize, nn: usize) -> Self {
        Acc {
            x: vec![c64(0.0, 0.0); ncell],
            f_norm: vec![0.0; nn],
            mu_f: vec![c64(0.0, 0.0); nn],
            outside: vec![c64(0.0, 0.0); nn],
            defect: vec![0.0; nn],
        }
    }

    fn add(&mut self, o: &Acc) {
        for (a, b) in self.x.iter_mut().zip(&o.x) {
            *a += b;
        }
        for t in 0..self.f_norm.len() {
            self.f_norm[t] += o.f_norm[t];
            self.mu_f[t] += o.mu_f[t];
            self.outside[t] += o.outside[t];
            self.defect[t] += o.defect[t];
        }
    }
}

/// The four sequences whose limits drive the extremality argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourLimits {
    pub n: Vec<i64>,
    /// `(1/(n+1)) ∫_{D_n} μ φ̃`.
    pub l1: Vec<C64>,
    /// `(1/(n+1)) ∫_{D_n} |φ̃ - F_n|`.
    pub l2: Vec<f64>,
    /// `(1/(n+1)) |∫_{outside D_n} μ F_n|`.
    pub l3: Vec<f64>,
    /// `‖F_n‖ / (n+1)`.
    pub l4: Vec<f64>,
    /// `Re ∫ μ φ_n`.
    pub pairings: Vec<C64>,
    pub cell_pairings: Vec<C64>,
    pub tail_bound: f64,
}

impl FourLimits {
    fn from_sweep(s: &Sweep) -> Self {
        let means = quadrature::cesaro_means(&s.cell_pairings);
        let scale = |n: i64| 1.0 / (n + 1) as f64;
        FourLimits {
            n: s.ns.clone(),
            l1: s.ns.iter().map(|&n| means[n as usize]).collect(),
            l2: s.ns.iter().zip(&s.defect).map(|(&n, d)| d * scale(n)).collect(),
            l3: s.ns.iter().zip(&s.mu_f_outside).map(|(&n, d)| d.norm() * scale(n)).collect(),
            l4: s.ns.iter().zip(&s.f_norm).map(|(&n, d)| d * scale(n)).collect(),
            pairings: s.mu_f.iter().zip(&s.f_norm).map(|(m, nrm)| m / *nrm).collect(),
            cell_pairings: s.cell_pairings.clone(),
            tail_bound: s.tail_bound,
        }
    }

    /// Entry for index `n`, if computed.
    pub fn at(&self, n: i64) -> Option<usize> {
        self.n.iter().position(|&m| m == n)
    }
}

/// The four sequences for every `n <= big_n`.
pub fn four_limits(
    mu: &BeltramiField,
    phi_tilde: &QuadraticDifferential,
    f: &QuadraticDifferential,
    decomp: &CellDecomposition,
    big_n: i64,
) -> Result<FourLimits> {
    let rule = CellRule::standard(decomp)?;
    let ns: Vec<i64> = (0..=big_n).collect();
    Ok(FourLimits::from_sweep(&hamilton_sweep(mu, phi_tilde, f, &rule, &ns)?))
}

/// Largest deviation of the deck-translated field from `k |φ̃|/φ̃` on the base
/// cell, for a schedule of translation indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub n: Vec<i64>,
    pub residual: Vec<f64>,
    /// Residuals never increase along the schedule.
    pub decreasing: bool,
    /// Final residual below [`HYPOTHESIS_TOL`].
    pub converged: bool,
}

pub const HYPOTHESIS_TOL: f64 = 1e-3;

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.decreasing && self.converged
    }
}

pub fn hypothesis_check(
    mu: &BeltramiField,
    phi_tilde: &QuadraticDifferential,
    k: f64,
    decomp: &CellDecomposition,
    n_max: i64,
    samples: usize,
) -> Result<HypothesisReport> {
    let mut s = Sampler::new(0x7e1c);
    let cell = decomp.cell(0);
    let pts: Vec<C64> = (0..samples)
        .map(|_| s.in_region(&cell, (0.0, decomp.period, -2.0, 2.0)))
        .collect();
    let mut schedule: Vec<i64> = vec![0];
    let mut n = 1;
    while n < n_max {
        schedule.push(n);
        n *= 2;
    }
    if n_max > 0 {
        schedule.push(n_max);
    }
    let mut residual = Vec::with_capacity(schedule.len());
    for &n in &schedule {
        let mut r = 0.0f64;
        for &z in &pts {
            let ph = phi_tilde.eval(z);
            let target = if ph.norm() == 0.0 { c64(0.0, 0.0) } else { ph.conj() / ph.norm() * k };
            r = r.max((mu.eval(z + decomp.period * n as f64)? - target).norm());
        }
        residual.push(r);
    }
    let decreasing = residual.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let converged = residual.last().is_some_and(|&r| r < HYPOTHESIS_TOL);
    Ok(HypothesisReport { n: schedule, residual, decreasing, converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonCertificate {
    pub k_target: f64,
    /// `(n, ∫ μ φ_n)`.
    pub pairing_trace: Vec<(i64, C64)>,
    /// `k - max_n Re ∫ μ φ_n`.
    pub gap: f64,
    pub diagnostics: FourLimits,
    pub hypothesis: HypothesisReport,
    pub verdict: Verdict,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl HamiltonCertificate {
    /// CSV trace: `n, re, im, L1..L4, gap` with the running gap.
    pub fn to_csv(&self) -> String {
        let d = &self.diagnostics;
        let mut out = String::from("n,re_pairing,im_pairing,L1,L2,L3,L4,gap\n");
        let mut best = f64::NEG_INFINITY;
        for (i, &(n, p)) in self.pairing_trace.iter().enumerate() {
            best = best.max(p.re);
            let _ = writeln!(
                out,
                "{n},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                p.re,
                p.im,
                d.l1[i].re,
                d.l2[i],
                d.l3[i],
                d.l4[i],
                self.k_target - best
            );
        }
        out
    }
}

/// Settings for [`certify_extremal_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    pub depth: u32,
    pub order: usize,
    pub margin: i64,
    pub preimage_decay: usize,
    /// Cells the preimage is spread over.
    pub window: usize,
    pub hypothesis_samples: usize,
    pub exec: Exec,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { depth: 1, order: 8, margin: 64, preimage_decay: 4, window: 1, hypothesis_samples: 50, exec: Exec::default() }
    }
}

pub fn certify_extremal(
    mu: &BeltramiField,
    hypothesis: (&QuadraticDifferential, f64),
    big_n: i64,
    tol: f64,
) -> Result<HamiltonCertificate> {
    certify_extremal_with(mu, hypothesis, big_n, tol, &CertifyOptions::default())
}

pub fn certify_extremal_with(
    mu: &BeltramiField,
    hypothesis: (&QuadraticDifferential, f64),
    big_n: i64,
    tol: f64,
    opts: &CertifyOptions,
) -> Result<HamiltonCertificate> {
    let (phi_tilde, k) = hypothesis;
    if !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("hypothesis constant {k} outside [0, 1)")));
    }
    if mu.sup_norm() > k + 1e-12 {
        return Err(Error::Hypothesis(format!("sup norm {} exceeds k = {k}", mu.sup_norm())));
    }
    if big_n < 0 || !(tol > 0.0) {
        return Err(Error::invalid("certificate needs N >= 0 and tol > 0"));
    }
    let decomp = CellDecomposition::default();
    let hyp = hypothesis_check(mu, phi_tilde, k, &decomp, big_n, opts.hypothesis_samples)?;
    let ns: Vec<i64> = (0..=big_n).collect();
    let (limits, mut notes) = if k == 0.0 {
        let z = vec![c64(0.0, 0.0); ns.len()];
        let limits = FourLimits {
            n: ns.clone(),
            l1: z.clone(),
            l2: vec![0.0; ns.len()],
            l3: vec![0.0; ns.len()],
            l4: vec![1.0; ns.len()],
            pairings: z.clone(),
            cell_pairings: vec![c64(0.0, 0.0); ns.len()],
            tail_bound: 0.0,
        };
        (limits, vec!["k = 0: the zero field is trivially extremal".to_string()])
    } else {
        let f = qdiff::windowed_preimage(phi_tilde, opts.preimage_decay, opts.window)?;
        let margin = opts.margin.max(2 * opts.window as i64 + 8);
        let mut rule = CellRule::new(&decomp, opts.depth, opts.order, margin)?;
        rule.exec = opts.exec;
        let sweep = hamilton_sweep(mu, phi_tilde, &f, &rule, &ns)?;
        (FourLimits::from_sweep(&sweep), Vec::new())
    };
    let pairing_trace: Vec<(i64, C64)> = ns.iter().copied().zip(limits.pairings.iter().copied()).collect();
    let best = pairing_trace.iter().map(|p| p.1.re).fold(f64::NEG_INFINITY, f64::max);
    let gap = k - best;
    let verdict = if gap <= tol && hyp.holds() { Verdict::Certified } else { Verdict::Inconclusive };
    if !hyp.holds() {
        notes.push(format!(
            "deck-twist hypothesis not met: residuals {:?} (decreasing: {}, converged: {})",
            hyp.residual, hyp.decreasing, hyp.converged
        ));
    }
    if gap > tol {
        notes.push(format!("gap {gap:.3e} above tolerance {tol:.3e}"));
    }
    Ok(HamiltonCertificate {
        k_target: k,
        pairing_trace,
        gap,
        diagnostics: limits,
        hypothesis: hyp,
        verdict,
        tol,
        notes,
    })
}

/// `tanh⁻¹(t k)`, the distance from the origin along the geodesic `t -> [t μ]`.
pub fn teich_distance(t: f64, k: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || !(0.0..1.0).contains(&k) {
        return Err(Error::invalid(format!("need 0 <= t <= 1 and 0 <= k < 1, got t = {t}, k = {k}")));
    }
    let x = t * k;
    if x >= 1.0 {
        return Err(Error::invalid("t k must stay below 1"));
    }
    Ok(x.atanh())
}

/// Distance between two points of the same geodesic.
pub fn teich_distance_between(t1: f64, t2: f64, k: f64) -> Result<f64> {
    teich_distance(t1, k)?;
    teich_distance(t2, k)?;
    let (a, b) = (t1 * k, t2 * k);
    Ok(((b - a) / (1.0 - a * b)).atanh().abs())
}
