//! Families of Beltrami coefficients obtained by gluing shear patches into a
//! fixed extremal background: admissible parameters, separation by pairings,
//! parameter recovery from dictionary pairings, and holomorphy checks.

use serde::{Deserialize, Serialize};

use crate::domains::Region;
use crate::extremal::pairing_with_error;
use crate::fields::{self, BeltramiField, LambdaParam};
use crate::qdiff::{dictionary_differential, DictKind, QuadraticDifferential};
use crate::quadrature::{contour_fourier, Contour};
use crate::{c64, Error, Result, C64};

/// Tolerance used for every pairing quadrature in this module.
pub const PAIRING_TOL: f64 = 1e-11;

/// Slit half-length used for disk patches.
pub const DISK_SLIT: f64 = 0.5;

/// Membership in the parameters whose shear stays strictly below `t0`.
pub fn lambda_prime_contains(lambda: C64, t0: f64) -> bool {
    LambdaParam::new(lambda).is_ok_and(|l| l.in_lambda_prime(t0))
}

/// The real parameter whose shear has modulus exactly `t0`: `2 t0 / sqrt(1 - t0²)`.
pub fn distinguished_lambda(t0: f64) -> Result<f64> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(Error::invalid(format!("no real parameter has shear modulus {t0}")));
    }
    Ok(2.0 * t0 / (1.0 - t0 * t0).sqrt())
}

/// `λ² / (4 + λ²)`, the parameter dependence of every annulus pairing.
pub fn shear_response(lambda: C64) -> C64 {
    let l2 = lambda * lambda;
    l2 / (4.0 + l2)
}

/// Inverse of [`shear_response`] on `Re λ >= 0`.
pub fn invert_response(q: C64) -> Result<LambdaParam> {
    if (q - 1.0).norm() < 1e-15 {
        return Err(Error::invalid("response 1 has no finite parameter"));
    }
    let l = (q * 4.0 / (1.0 - q)).sqrt();
    let l = if l.re < 0.0 { -l } else { l };
    LambdaParam::new(l).map_err(|_| Error::invalid(format!("response {q} leaves the injective branch")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Disk,
    PuncturedDisk,
    Annulus,
}

/// Where a patch sits and which shear model it carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "patch", rename_all = "snake_case")]
pub enum Patch {
    /// Pushed-forward strip shear on a disk, slit of half-length [`DISK_SLIT`]
    /// in the unit model.
    SlitDisk { center: C64, radius: f64 },
    /// Ring shear with inner radius 0.
    PuncturedDisk { center: C64, radius: f64 },
    Ring { center: C64, inner: f64, outer: f64 },
}

impl Patch {
    pub fn region(&self) -> Region {
        match *self {
            Patch::SlitDisk { center, radius } => Region::Disk { center, radius },
            Patch::PuncturedDisk { center, radius } => Region::Ring { center, inner: 0.0, outer: radius },
            Patch::Ring { center, inner, outer } => Region::Ring { center, inner, outer },
        }
    }

    pub fn field(&self, lambda: LambdaParam) -> Result<BeltramiField> {
        match *self {
            Patch::SlitDisk { center, radius } => fields::placed_disk_family(lambda, DISK_SLIT, center, radius),
            Patch::PuncturedDisk { center, radius } => fields::ring_family(lambda, center, 0.0, radius),
            Patch::Ring { center, inner, outer } => fields::ring_family(lambda, center, inner, outer),
        }
    }
}

/// A background field with shear patches glued in on disjoint regions; one
/// parameter per patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicFamily {
    pub kind: FamilyKind,
    /// The background outside the patches.
    pub base: BeltramiField,
    pub patches: Vec<Patch>,
    /// Index of the first patch (`-L` for truncated annulus strings, else 0).
    pub first_index: i64,
    pub t0: f64,
    /// Real parameter with shear modulus `t0`.
    pub lambda0: f64,
    /// Largest admitted `|λ|`.
    pub bound: f64,
}

impl GeodesicFamily {
    /// `λ` is a valid parameter, `|λ| <= bound` and the shear modulus is at most
    /// `t0`. The closure is taken so that `lambda0` itself is admitted.
    pub fn admissible(&self, lambda: C64) -> bool {
        LambdaParam::new(lambda).is_ok_and(|l| l.dilatation() <= self.t0 + 1e-12)
            && lambda.norm() <= self.bound * (1.0 + 1e-12)
    }

    /// The glued field for one parameter per patch.
    pub fn member(&self, lambdas: &[C64]) -> Result<BeltramiField> {
        if lambdas.len() != self.patches.len() {
            return Err(Error::invalid(format!(
                "family has {} patches, got {} parameters",
                self.patches.len(),
                lambdas.len()
            )));
        }
        let mut pieces = Vec::new();
        for (p, &l) in self.patches.iter().zip(lambdas) {
            if !self.admissible(l) {
                return Err(Error::invalid(format!("parameter {l} outside the admissible set for t0 = {}", self.t0)));
            }
            pieces.extend(p.field(LambdaParam::new(l)?)?.pieces);
        }
        let regions: Vec<Region> = self.patches.iter().map(Patch::region).collect();
        for b in &self.base.pieces {
            let mut q = b.clone();
            q.exclude.extend(regions.iter().cloned());
            pieces.push(q);
        }
        BeltramiField::from_pieces(self.base.domain.clone(), pieces)
    }

    /// Single-patch convenience form of [`GeodesicFamily::member`].
    pub fn member_at(&self, lambda: C64) -> Result<BeltramiField> {
        self.member(&[lambda])
    }

    /// The background with every patch cut out.
    pub fn restricted_base(&self) -> Result<BeltramiField> {
        let zeros = vec![c64(0.0, 0.0); self.patches.len()];
        self.member(&zeros)
    }

    /// The patch with family index `j`.
    pub fn patch(&self, j: i64) -> Result<&Patch> {
        let i = j - self.first_index;
        if i < 0 || i as usize >= self.patches.len() {
            return Err(Error::invalid(format!("no patch with index {j}")));
        }
        Ok(&self.patches[i as usize])
    }
}

fn check_base(base: &BeltramiField, t0: f64) -> Result<()> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(Error::invalid(format!("t0 = {t0} outside (0, 1)")));
    }
    if (base.sup_norm() - t0).abs() > 1e-12 {
        return Err(Error::Hypothesis(format!(
            "background sup norm {} differs from t0 = {t0}",
            base.sup_norm()
        )));
    }
    Ok(())
}

/// Integers strictly inside the patch region. A punctured disk may only
/// have its centre there.
fn check_punctures(patch: &Patch) -> Result<()> {
    let (c, r_in, r_out) = patch_radii(patch);
    let lo = (c.re - r_out).floor() as i64;
    let hi = (c.re + r_out).ceil() as i64;
    for k in lo..=hi {
        let z = c64(k as f64, 0.0);
        let d = (z - c).norm();
        if d > r_in && d < r_out && !(matches!(patch, Patch::PuncturedDisk { .. }) && d == 0.0) {
            return Err(Error::invalid(format!("patch region contains the puncture {k}")));
        }
    }
    Ok(())
}

fn patch_radii(p: &Patch) -> (C64, f64, f64) {
    match *p {
        Patch::SlitDisk { center, radius } => (center, -1.0, radius),
        Patch::PuncturedDisk { center, radius } => (center, -1.0, radius),
        Patch::Ring { center, inner, outer } => (center, inner, outer),
    }
}

/// Family over one region `u`: a disk (slit-disk shear), a punctured disk or
/// a ring (ring shear). The background must have sup norm `t0`.
pub fn build_family(kind: FamilyKind, u: &Region, base: &BeltramiField, t0: f64) -> Result<GeodesicFamily> {
    check_base(base, t0)?;
    let patch = match (kind, u) {
        (FamilyKind::Disk, Region::Disk { center, radius }) => Patch::SlitDisk { center: *center, radius: *radius },
        (FamilyKind::PuncturedDisk, Region::Disk { center, radius }) => {
            Patch::PuncturedDisk { center: *center, radius: *radius }
        }
        (FamilyKind::PuncturedDisk, Region::Ring { center, inner, outer }) if *inner == 0.0 => {
            Patch::PuncturedDisk { center: *center, radius: *outer }
        }
        (FamilyKind::Annulus, Region::Ring { center, inner, outer }) if *inner > 0.0 => {
            Patch::Ring { center: *center, inner: *inner, outer: *outer }
        }
        _ => return Err(Error::invalid(format!("region {u:?} does not fit a {kind:?} family"))),
    };
    fields::check_inside(&patch.region(), &base.domain)?;
    if base.domain == Region::PlaneMinusIntegers {
        check_punctures(&patch)?;
    }
    let lambda0 = distinguished_lambda(t0)?;
    Ok(GeodesicFamily {
        kind,
        base: base.clone(),
        patches: vec![patch],
        first_index: 0,
        t0,
        lambda0,
        bound: lambda0,
    })
}

/// Centre of the `j`-th annulus of the string family.
pub fn annulus_center(j: i64) -> C64 {
    c64(3.0 * j as f64 + 1.5, 0.0)
}

/// `(inner, outer)` radii of the `j`-th annulus.
pub fn annulus_radii(j: i64) -> (f64, f64) {
    (0.5, 0.5 + 0.5f64.powi(j.unsigned_abs() as i32))
}

/// A family member with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub family: GeodesicFamily,
    pub lambdas: Vec<C64>,
    pub field: BeltramiField,
}

/// The string family on the annuli `|j| <= L` around `3j + 3/2` with the given
/// background; `lambdas[i]` belongs to annulus `i - L`.
pub fn build_infinite_family(lambdas: &[C64], bound: f64, base: &BeltramiField, t0: f64) -> Result<FamilyMember> {
    check_base(base, t0)?;
    if lambdas.len() % 2 == 0 {
        return Err(Error::invalid("need an odd number 2L + 1 of parameters"));
    }
    let lambda0 = distinguished_lambda(t0)?;
    if !(bound > 0.0 && bound <= lambda0 * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!("bound {bound} must lie in (0, {lambda0}]")));
    }
    let l = (lambdas.len() / 2) as i64;
    let patches = (-l..=l)
        .map(|j| {
            let (inner, outer) = annulus_radii(j);
            Patch::Ring { center: annulus_center(j), inner, outer }
        })
        .collect();
    let family = GeodesicFamily {
        kind: FamilyKind::Annulus,
        base: base.clone(),
        patches,
        first_index: -l,
        t0,
        lambda0,
        bound,
    };
    let field = family.member(lambdas)?;
    Ok(FamilyMember { family, lambdas: lambdas.to_vec(), field })
}

/// `∫_patch (ν_λ - 0) φ` as an exact function of the two shear coefficients:
/// `lower(λ) g_lower + upper(λ) g_upper`, fitted from two quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchPairing {
    pub g_lower: C64,
    pub g_upper: C64,
    pub error: f64,
}

const REFERENCE: [f64; 2] = [1.0, 0.5];

impl PatchPairing {
    pub fn new(patch: &Patch, phi: &QuadraticDifferential) -> Result<Self> {
        let region = patch.region();
        let mut rows = [[c64(0.0, 0.0); 3]; 2];
        let mut error = 0.0;
        for (row, &x) in rows.iter_mut().zip(&REFERENCE) {
            let l = LambdaParam::real(x)?;
            let r = pairing_with_error(&patch.field(l)?, phi, &region, PAIRING_TOL)?;
            *row = [l.lower_coefficient(), l.upper_coefficient(), r.value];
            error += r.error_estimate;
        }
        let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
        let g_lower = (rows[0][2] * rows[1][1] - rows[0][1] * rows[1][2]) / det;
        let g_upper = (rows[0][0] * rows[1][2] - rows[0][2] * rows[1][0]) / det;
        Ok(PatchPairing { g_lower, g_upper, error })
    }

    pub fn value(&self, lambda: LambdaParam) -> C64 {
        lambda.lower_coefficient() * self.g_lower + lambda.upper_coefficient() * self.g_upper
    }
}

/// Witness that two members are not infinitesimally equivalent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub lambda1: C64,
    pub lambda2: C64,
    /// Position of the witness in the dictionary.
    pub witness_index: usize,
    pub witness: QuadraticDifferential,
    /// `∫ (μ_λ1 - μ_λ2) φ`.
    pub pairing: C64,
    pub threshold: f64,
}

/// Outcome of [`separate_with_report`]: the certificate if any, and every
/// pairing computed on the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub certificate: Option<SeparationCertificate>,
    pub pairings: Vec<C64>,
}

/// First dictionary element whose pairing with the difference of the two
/// members exceeds `threshold`.
pub fn separate(
    family: &GeodesicFamily,
    lambda1: C64,
    lambda2: C64,
    dictionary: &[QuadraticDifferential],
    threshold: f64,
) -> Result<Option<SeparationCertificate>> {
    Ok(separate_with_report(family, lambda1, lambda2, dictionary, threshold)?.certificate)
}

pub fn separate_with_report(
    family: &GeodesicFamily,
    lambda1: C64,
    lambda2: C64,
    dictionary: &[QuadraticDifferential],
    threshold: f64,
) -> Result<SeparationReport> {
    if family.patches.len() != 1 {
        return Err(Error::invalid("separation compares single-patch families"));
    }
    for l in [lambda1, lambda2] {
        if !family.admissible(l) {
            return Err(Error::invalid(format!("parameter {l} outside the admissible set")));
        }
    }
    let (l1, l2) = (LambdaParam::new(lambda1)?, LambdaParam::new(lambda2)?);
    let mut pairings = Vec::new();
    if lambda1 == lambda2 {
        pairings.resize(dictionary.len(), c64(0.0, 0.0));
        return Ok(SeparationReport { certificate: None, pairings });
    }
    for (i, phi) in dictionary.iter().enumerate() {
        let p = PatchPairing::new(&family.patches[0], phi)?;
        let d = p.value(l1) - p.value(l2);
        pairings.push(d);
        if d.norm() > threshold {
            let certificate = SeparationCertificate {
                lambda1,
                lambda2,
                witness_index: i,
                witness: phi.clone(),
                pairing: d,
                threshold,
            };
            return Ok(SeparationReport { certificate: Some(certificate), pairings });
        }
    }
    Ok(SeparationReport { certificate: None, pairings })
}

/// Basis elements first, then the single-pole dictionary differentials of
/// the string family with truncation `l`.
pub fn default_dictionary(l: i64) -> Result<Vec<QuadraticDifferential>> {
    let basis = crate::qdiff::qs_basis()?;
    let mut out = vec![basis.phi_r, basis.phi_l];
    for j in -l..=l {
        out.push(dictionary_differential(DictKind::Alpha, j, l)?);
        out.push(dictionary_differential(DictKind::Beta, j, l)?);
    }
    Ok(out)
}

/// Pairings `∫ (μ_λ - μ_0) φ_s` of a string-family member against the
/// all-alpha string and the strings with one beta at index `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardPairings {
    pub l: i64,
    pub alpha: C64,
    /// Entry `J + L` is the string with a beta at `J`.
    pub substituted: Vec<C64>,
    pub error: f64,
}

impl ForwardPairings {
    /// `substituted[J] - alpha`; only annulus `J` contributes.
    pub fn differences(&self) -> Vec<C64> {
        self.substituted.iter().map(|s| s - self.alpha).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("string,re_pairing,im_pairing\n");
        out.push_str(&format!("alpha,{:e},{:e}\n", self.alpha.re, self.alpha.im));
        for (i, s) in self.substituted.iter().enumerate() {
            out.push_str(&format!("beta_at_{},{:e},{:e}\n", i as i64 - self.l, s.re, s.im));
        }
        out
    }
}

/// Pairings of every annulus patch against every dictionary element.
fn patch_table(member: &FamilyMember, l: i64) -> Result<Vec<[Vec<PatchPairing>; 2]>> {
    let fam = &member.family;
    let rows = crate::par::map_range(crate::par::Exec::default(), fam.patches.len(), |pi| {
        let mut per_kind: [Vec<PatchPairing>; 2] = [Vec::new(), Vec::new()];
        for (k, kind) in [DictKind::Alpha, DictKind::Beta].into_iter().enumerate() {
            for i in -l..=l {
                let phi = dictionary_differential(kind, i, l)?;
                per_kind[k].push(PatchPairing::new(&fam.patches[pi], &phi)?);
            }
        }
        Ok::<_, Error>(per_kind)
    });
    rows.into_iter().collect()
}

pub fn forward_pairings(member: &FamilyMember, l: i64) -> Result<ForwardPairings> {
    let fam = &member.family;
    if fam.first_index != -l || fam.patches.len() as i64 != 2 * l + 1 {
        return Err(Error::invalid(format!("member is not a string family with L = {l}")));
    }
    let table = patch_table(member, l)?;
    let lambdas: Vec<LambdaParam> = member.lambdas.iter().map(|&x| LambdaParam::new(x)).collect::<Result<_>>()?;
    let n = (2 * l + 1) as usize;
    // string value = Σ_patches Σ_i pairing(patch, φ_{kind_i, i})
    let string_value = |beta_at: Option<usize>| -> C64 {
        let mut acc = c64(0.0, 0.0);
        for (pi, lam) in lambdas.iter().enumerate() {
            for i in 0..n {
                let k = usize::from(beta_at == Some(i));
                acc += table[pi][k][i].value(*lam);
            }
        }
        acc
    };
    let error = table.iter().flat_map(|t| t.iter().flatten()).map(|p| p.error).sum();
    Ok(ForwardPairings { l, alpha: string_value(None), substituted: (0..n).map(|j| string_value(Some(j))).collect(), error })
}

/// Geometry needed to invert the forward pairings: per annulus the log
/// modulus and the jump of the `(z - c)^-2` Laurent coefficient between the
/// beta and alpha dictionary elements, plus the calibrated prefactor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryGeometry {
    pub l: i64,
    pub log_moduli: Vec<f64>,
    pub laurent_jumps: Vec<C64>,
    /// Pairing per unit of `log modulus x Laurent coefficient x response`.
    pub prefactor: C64,
}

fn laurent_minus_two(phi: &QuadraticDifferential, j: i64) -> Result<C64> {
    let (inner, outer) = annulus_radii(j);
    let c = annulus_center(j);
    contour_fourier(|z| phi.eval(z), Contour::Circle { center: c, radius: (inner * outer).sqrt() }, 256)
}

impl RecoveryGeometry {
    /// Laurent data for truncation `l` with an explicit prefactor.
    pub fn with_prefactor(l: i64, prefactor: C64) -> Result<Self> {
        let mut log_moduli = Vec::new();
        let mut laurent_jumps = Vec::new();
        for j in -l..=l {
            let (inner, outer) = annulus_radii(j);
            log_moduli.push((outer / inner).ln());
            let a = laurent_minus_two(&dictionary_differential(DictKind::Alpha, j, l)?, j)?;
            let b = laurent_minus_two(&dictionary_differential(DictKind::Beta, j, l)?, j)?;
            laurent_jumps.push(b - a);
        }
        Ok(RecoveryGeometry { l, log_moduli, laurent_jumps, prefactor })
    }

    /// Calibrates the prefactor from a reference member with `λ = 1` on the
    /// central annulus and zero elsewhere.
    pub fn calibrated(l: i64, base: &BeltramiField, t0: f64) -> Result<Self> {
        let mut geo = Self::with_prefactor(l, c64(1.0, 0.0))?;
        let mut lambdas = vec![c64(0.0, 0.0); (2 * l + 1) as usize];
        lambdas[l as usize] = c64(1.0, 0.0);
        let lambda0 = distinguished_lambda(t0)?;
        let member = build_infinite_family(&lambdas, lambda0, base, t0)?;
        let d = forward_pairings(&member, l)?.differences()[l as usize];
        let unit = geo.log_moduli[l as usize] * geo.laurent_jumps[l as usize] * shear_response(c64(1.0, 0.0));
        geo.prefactor = d / unit;
        Ok(geo)
    }
}

/// Parameters from the pairing differences: `λ² / (4 + λ²)` per annulus,
/// then the branch with `Re λ >= 0`. Differences below the accumulated
/// quadrature error read as `λ = 0`; the square root would otherwise turn
/// roundoff into visible parameters.
pub fn recover_parameters(pairings: &ForwardPairings, l: i64, geometry: &RecoveryGeometry) -> Result<Vec<C64>> {
    if pairings.l != l || geometry.l != l {
        return Err(Error::invalid("truncation mismatch between pairings and geometry"));
    }
    pairings
        .differences()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let unit = geometry.prefactor * geometry.log_moduli[i] * geometry.laurent_jumps[i];
            if unit.norm() == 0.0 {
                return Err(Error::invalid(format!("annulus {} has no pairing sensitivity", i as i64 - l)));
            }
            if d.norm() <= pairings.error {
                return Ok(c64(0.0, 0.0));
            }
            Ok(invert_response(d / unit)?.value())
        })
        .collect()
}

/// `(A² / (1 - A²))` with `A = -iλ/2`, the quantity the pairings determine.
pub fn response_ratio(lambda: C64) -> C64 {
    let a = -C64::i() * lambda / 2.0;
    a * a / (1.0 - a * a)
}

/// Cauchy-Riemann and mean-value diagnostics of a parameter observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyReport {
    pub center: C64,
    pub radius: f64,
    /// `|g_x + i g_y|` relative to the size of `g` and `g_x`.
    pub cr_residual: f64,
    /// `|mean over the circle - g(center)|`, relative.
    pub mean_value_error: f64,
    pub tol: f64,
    pub pass: bool,
}

pub const HOLOMORPHY_TOL: f64 = 1e-6;

/// Four-point stencil at step `radius / 10⁴` and the 16-node circle mean.
pub fn holomorphy_check<F>(mut map: F, center: C64, radius: f64) -> Result<HolomorphyReport>
where
    F: FnMut(C64) -> Result<C64>,
{
    if !(radius > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let h = radius * 1e-4;
    let g0 = map(center)?;
    let gx = (map(center + h)? - map(center - h)?) / (2.0 * h);
    let gy = (map(center + c64(0.0, h))? - map(center - c64(0.0, h))?) / (2.0 * h);
    let nodes = 16;
    let mut mean = c64(0.0, 0.0);
    for k in 0..nodes {
        mean += map(center + C64::from_polar(radius, std::f64::consts::TAU * k as f64 / nodes as f64))?;
    }
    mean /= nodes as f64;
    let scale = g0.norm().max(gx.norm() * radius).max(f64::MIN_POSITIVE);
    let cr_residual = (gx + C64::i() * gy).norm() / gx.norm().max(g0.norm()).max(f64::MIN_POSITIVE);
    let mean_value_error = (mean - g0).norm() / scale;
    Ok(HolomorphyReport {
        center,
        radius,
        cr_residual,
        mean_value_error,
        tol: HOLOMORPHY_TOL,
        pass: cr_residual < HOLOMORPHY_TOL && mean_value_error < HOLOMORPHY_TOL,
    })
}

/// `λ -> ∫_U μ_λ φ` for a single-patch family, as a closure for
/// [`holomorphy_check`].
pub fn pairing_observable(family: &GeodesicFamily, phi: &QuadraticDifferential) -> Result<impl Fn(C64) -> Result<C64>> {
    if family.patches.len() != 1 {
        return Err(Error::invalid("observable needs a single-patch family"));
    }
    let p = PatchPairing::new(&family.patches[0], phi)?;
    Ok(move |l: C64| -> Result<C64> {
        let l = LambdaParam::new(l)?;
        Ok(p.value(l))
    })
}

/// Closure of the patch regions meets the integers.
pub fn closure_meets_punctures(family: &GeodesicFamily) -> bool {
    family.patches.iter().any(|p| {
        let (c, r_in, r_out) = patch_radii(p);
        let lo = (c.re - r_out).floor() as i64;
        let hi = (c.re + r_out).ceil() as i64;
        (lo..=hi).any(|k| {
            let d = (c64(k as f64, 0.0) - c).norm();
            d >= r_in - 1e-12 && d <= r_out + 1e-12
        })
    })
}
