//! One function per subcommand. Each returns the exit status and writes its
//! artifacts into the output directory.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;
use teichlab::beltsolve::{self, ClosedFormMap, MapGrid, SolveOptions, SolveStats, TrivialityReport};
use teichlab::elliptic::{self, EllipticCoverData};
use teichlab::extremal::{certify_extremal_with, constants_audit, Verdict};
use teichlab::geodesics::{self, GeodesicFamily, RecoveryGeometry};
use teichlab::sampling::Sampler;
use teichlab::domains::Region;

use crate::config::*;
use crate::output::Output;
use crate::{Exit, RunError};

pub struct Context {
    pub out: Output,
    pub seed: u64,
    pub tol: Option<f64>,
    pub grid_out: Option<PathBuf>,
    pub grid_in: Option<PathBuf>,
}

pub fn certify(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: CertifyConfig = parse(text)?;
    let tol = cx.tol.unwrap_or(cfg.tol);
    let mu = cfg.field.build()?;
    let phi = cfg.hypothesis.differential.build()?;
    let cert = certify_extremal_with(&mu, (&phi, cfg.hypothesis.k), cfg.n, tol, &cfg.options)?;
    cx.out.json("certificate.json", &cert)?;
    cx.out.text("trace.csv", &cert.to_csv())?;
    Ok(match cert.verdict {
        Verdict::Certified => Exit::Ok,
        Verdict::Inconclusive => Exit::Inconclusive,
    })
}

pub fn audit_constants(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: AuditConfig = parse(text)?;
    let tol = cx.tol.unwrap_or(cfg.tol);
    let audit = constants_audit(&cfg.audit)?;
    let pass = audit.max_residual <= tol;
    cx.out.json("audit.json", &json!({ "audit": audit, "tol": tol, "pass": pass }))?;
    Ok(if pass { Exit::Ok } else { Exit::Numerical })
}

#[derive(Serialize)]
struct SolveReport {
    n: usize,
    source: &'static str,
    stats: SolveStats,
    /// Worst successive residual ratio against `sup |μ| + 0.05`.
    ratio_bound: f64,
    ratios_ok: bool,
    max_dilatation: f64,
    oracle_error: Option<f64>,
    triviality: Option<TrivialityReport>,
    check_tol: f64,
    pass: bool,
}

pub fn solve(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: SolveConfig = parse(text)?;
    let check_tol = cx.tol.unwrap_or(cfg.check_tol);
    let mu = cfg.field.build()?;
    let (g, source) = match &cx.grid_in {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            let (n, bbox, f) = beltsolve::read_qcgrid(std::io::BufReader::new(file))?;
            (MapGrid::from_samples(n, bbox, f)?, "grid_in")
        }
        None => {
            let opts = SolveOptions {
                tol: cfg.tol,
                max_iter: cfg.max_iter,
                supersample: cfg.supersample,
                normalize: cfg.normalize,
                ..SolveOptions::new(cfg.n, cfg.bbox.into())
            };
            (beltsolve::solve_with(&mu, &opts)?, "solver")
        }
    };
    let ratio_bound = g.stats.sup_mu + 0.05;
    let ratios_ok = g.stats.ratios.iter().all(|r| *r <= ratio_bound);
    let oracle_error = ClosedFormMap::of(&mu).map(|m| m.max_grid_error(&g));
    let triviality = if cfg.punctures.is_empty() {
        None
    } else {
        Some(beltsolve::verify_triviality(&mu, &cfg.punctures, &g, check_tol)?)
    };
    let pass = ratios_ok
        && oracle_error.is_none_or(|e| e < check_tol)
        && triviality.as_ref().is_none_or(|t| t.pass);
    let report = SolveReport {
        n: g.n,
        source,
        max_dilatation: beltsolve::maximal_dilatation(&g)?,
        stats: g.stats.clone(),
        ratio_bound,
        ratios_ok,
        oracle_error,
        triviality,
        check_tol,
        pass,
    };
    if cx.grid_in.is_none() {
        let mut buf = Vec::new();
        beltsolve::write_qcgrid(&mut buf, g.n, &g.bbox, &g.f)?;
        match &cx.grid_out {
            Some(p) => crate::output::write_atomic(p, &buf)?,
            None => cx.out.bytes("grid.qcgrid", &buf)?,
        }
    }
    cx.out.json("solve_report.json", &report)?;
    Ok(if pass { Exit::Ok } else { Exit::Numerical })
}

fn single_family(spec: &FamilySpec) -> Result<GeodesicFamily, RunError> {
    let kind = spec.single_kind().ok_or_else(|| RunError::Config("this command needs a single-patch family".into()))?;
    let region = spec.region.as_ref().ok_or_else(|| RunError::Config("family region missing".into()))?;
    Ok(geodesics::build_family(kind, region, &spec.base()?, spec.t0)?)
}

/// Largest `||μ(z)| - t0|` over random points where the member is defined.
fn constancy(member: &teichlab::fields::BeltramiField, t0: f64, window: (f64, f64, f64, f64), samples: usize, seed: u64) -> f64 {
    let mut s = Sampler::new(seed);
    let mut worst = 0.0f64;
    for z in s.points(&Region::PlaneMinusIntegers, window, samples) {
        if let Ok(v) = member.eval(z) {
            worst = worst.max((v.norm() - t0).abs());
        }
    }
    worst
}

pub fn family(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: FamilyConfig = parse(text)?;
    let t0 = cfg.family.t0;
    let mut members = Vec::new();
    let mut pass = true;
    let (lambda0, constancy_dev, kind) = if cfg.family.kind == FamilyKindSpec::String {
        let base = cfg.family.base()?;
        let lambda0 = geodesics::distinguished_lambda(t0)?;
        let bound = cfg.family.bound.unwrap_or(lambda0);
        for seq in &cfg.sequences {
            let m = geodesics::build_infinite_family(seq, bound, &base, t0)?;
            let sup = m.field.sup_norm();
            pass &= sup <= t0 + 1e-12;
            members.push(json!({ "parameters": seq, "sup_norm": sup, "pieces": m.field.pieces.len() }));
        }
        let l = cfg.sequences.first().map_or(0, |s| s.len() / 2);
        let top = vec![C64::new(lambda0, 0.0); 2 * l + 1];
        let m = geodesics::build_infinite_family(&top, lambda0, &base, t0)?;
        let w = 3.0 * l as f64 + 3.0;
        (lambda0, constancy(&m.field, t0, (-w, w, -2.0, 2.0), cfg.samples, cx.seed), "string")
    } else {
        let fam = single_family(&cfg.family)?;
        for &l in &cfg.lambdas {
            let admissible = fam.admissible(l);
            let entry = if admissible {
                let m = fam.member_at(l)?;
                pass &= m.sup_norm() <= t0 + 1e-12;
                json!({
                    "parameters": [l],
                    "admissible": true,
                    "lambda_prime": geodesics::lambda_prime_contains(l, t0),
                    "sup_norm": m.sup_norm(),
                    "pieces": m.pieces.len(),
                })
            } else {
                json!({ "parameters": [l], "admissible": false, "lambda_prime": false })
            };
            members.push(entry);
        }
        let m = fam.member_at(C64::new(fam.lambda0, 0.0))?;
        let bb = fam.patches[0].region().bounding_box().unwrap_or((-3.0, 3.0, -2.0, 2.0));
        let window = (bb.0.min(-3.0), bb.1.max(3.0), bb.2.min(-2.0), bb.3.max(2.0));
        let kind = match fam.kind {
            geodesics::FamilyKind::Disk => "disk",
            geodesics::FamilyKind::PuncturedDisk => "punctured_disk",
            geodesics::FamilyKind::Annulus => "annulus",
        };
        (fam.lambda0, constancy(&m, t0, window, cfg.samples, cx.seed), kind)
    };
    pass &= constancy_dev < 1e-10;
    cx.out.json(
        "family.json",
        &json!({
            "kind": kind,
            "t0": t0,
            "lambda0": lambda0,
            "constancy_deviation": constancy_dev,
            "samples": cfg.samples,
            "seed": cx.seed,
            "members": members,
            "pass": pass,
        }),
    )?;
    Ok(if pass { Exit::Ok } else { Exit::Numerical })
}

pub fn separate(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: SeparateConfig = parse(text)?;
    let threshold = cx.tol.unwrap_or(cfg.threshold);
    let fam = single_family(&cfg.family)?;
    let dict = geodesics::default_dictionary(cfg.dictionary_l)?;
    let rep = geodesics::separate_with_report(&fam, cfg.lambda1, cfg.lambda2, &dict, threshold)?;
    let equal = cfg.lambda1 == cfg.lambda2;
    cx.out.json(
        "separation.json",
        &json!({
            "lambda1": cfg.lambda1,
            "lambda2": cfg.lambda2,
            "threshold": threshold,
            "certificate": rep.certificate.as_ref().map(|c| json!({
                "witness_index": c.witness_index,
                "pairing": c.pairing,
                "threshold": c.threshold,
            })),
            "pairings": rep.pairings,
        }),
    )?;
    Ok(match (rep.certificate.is_some(), equal) {
        (true, _) => Exit::Ok,
        (false, true) if rep.pairings.iter().all(|p| p.norm() < 1e-10) => Exit::Ok,
        (false, true) => Exit::Numerical,
        (false, false) => Exit::Inconclusive,
    })
}

pub fn recover(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: RecoverConfig = parse(text)?;
    let tol = cx.tol.unwrap_or(cfg.tol);
    if cfg.lambdas.len() % 2 == 0 {
        return Err(RunError::Config("need 2L + 1 parameters".into()));
    }
    let l = (cfg.lambdas.len() / 2) as i64;
    let base = FamilySpec { kind: FamilyKindSpec::String, region: None, t0: cfg.t0, base: None, bound: None }.base()?;
    let bound = cfg.bound.unwrap_or(geodesics::distinguished_lambda(cfg.t0)?);
    let member = geodesics::build_infinite_family(&cfg.lambdas, bound, &base, cfg.t0)?;
    let pairings = geodesics::forward_pairings(&member, l)?;
    let geometry = match cfg.prefactor {
        Some(p) => RecoveryGeometry::with_prefactor(l, p)?,
        None => RecoveryGeometry::calibrated(l, &base, cfg.t0)?,
    };
    let recovered = geodesics::recover_parameters(&pairings, l, &geometry)?;
    let max_error = recovered.iter().zip(&cfg.lambdas).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let pass = max_error <= tol;
    cx.out.text("pairings.csv", &pairings.to_csv())?;
    cx.out.json(
        "recovery.json",
        &json!({
            "l": l,
            "lambdas": cfg.lambdas,
            "recovered": recovered,
            "prefactor": geometry.prefactor,
            "max_error": max_error,
            "tol": tol,
            "pass": pass,
        }),
    )?;
    Ok(if pass { Exit::Ok } else { Exit::Numerical })
}

pub fn rho(text: &str, cx: &Context) -> Result<Exit, RunError> {
    let cfg: RhoConfig = parse(text)?;
    let tol = cx.tol.unwrap_or(cfg.tol);
    let mut csv = String::from("input,t,height,round_trip_error,particular_solutions_height,phi_tilde_zero,phi_tilde_zero_contour\n");
    let mut pass = true;
    let mut row = |input: &str, t: f64, height: f64, err: f64| -> Result<(), RunError> {
        let mps = elliptic::modulus_by_particular_solutions(t)?;
        let data = EllipticCoverData::new(t)?;
        let p = data.phi_tilde_zero(|_| C64::new(1.0, 0.0));
        let c = data.phi_tilde_zero_contour(|_| C64::new(1.0, 0.0), data.height() / 2.0, 64)?;
        pass &= err < tol && p.re > 0.0 && (p - c).norm() < cfg.cross_tol;
        csv.push_str(&format!("{input},{t:e},{height:e},{err:e},{mps:e},{:e},{:e}\n", p.re, c.re));
        Ok(())
    };
    for &r in &cfg.heights {
        let t = elliptic::t_of_r(r)?;
        let back = elliptic::height_of_t(t)?;
        row("height", t, r, (back - r).abs())?;
    }
    for &t in &cfg.half_lengths {
        let r = elliptic::height_of_t(t)?;
        let back = elliptic::t_of_r(r)?;
        row("half_length", t, r, (back - t).abs())?;
    }
    cx.out.text("rho.csv", &csv)?;
    Ok(if pass { Exit::Ok } else { Exit::Numerical })
}
