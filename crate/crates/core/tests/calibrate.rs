//! Regenerates the files under `tests/fixtures`. Run with
//! `cargo test -p teichlab --test calibrate -- --ignored`.

use std::path::PathBuf;

use serde_json::json;
use teichlab::extremal::{certify_extremal_with, constants_audit, AuditOptions, CertifyOptions, HamiltonCertificate};
use teichlab::fields::{example1_field, WeightSequences};
use teichlab::qdiff::qs_basis;

const K: f64 = 0.3;
const N_ORACLE: i64 = 200;
const N_CHECK: i64 = 40;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn summary(c: &HamiltonCertificate) -> serde_json::Value {
    let d = &c.diagnostics;
    let i = d.n.len() - 1;
    json!({
        "n": d.n[i],
        "gap": c.gap,
        "l1": d.l1[i].re,
        "l2": d.l2[i],
        "l3": d.l3[i],
        "l4": d.l4[i],
        "certified": c.verdict == teichlab::extremal::Verdict::Certified,
    })
}

#[test]
#[ignore]
fn write_fixtures() {
    let basis = qs_basis().unwrap();
    let mu = example1_field(K, WeightSequences::Logistic, basis.clone()).unwrap();
    let opts = CertifyOptions { depth: 0, ..CertifyOptions::default() };
    let oracle = certify_extremal_with(&mu, (&basis.phi_r, K), N_ORACLE, 0.02, &opts).unwrap();
    let check = certify_extremal_with(&mu, (&basis.phi_r, K), N_CHECK, 0.02, &opts).unwrap();
    // deviations decay like 1/(n+1); carry the oracle's down to the check index
    let d = &oracle.diagnostics;
    let i = d.n.len() - 1;
    let scale = (N_ORACLE + 1) as f64 / (N_CHECK + 1) as f64;
    let predicted = json!({
        "gap": oracle.gap * scale,
        "l1": (d.l1[i].re - K).abs() * scale,
        "l2": d.l2[i] * scale,
        "l3": d.l3[i] * scale,
        "l4": (d.l4[i] - 1.0).abs() * scale,
    });
    let calibration = json!({
        "field": {"k": K, "weights": "logistic", "hypothesis": "phi_r"},
        "options": opts,
        "oracle": summary(&oracle),
        "check": summary(&check),
        "predicted_deviation_at_check": predicted,
        "thresholds": {"l1": 0.02, "l2": 0.05, "l3": 0.05, "l4": 0.05, "gap": 0.02},
        "reproduce_tol": 1e-8,
    });
    std::fs::write(fixtures().join("calibration.json"), serde_json::to_string_pretty(&calibration).unwrap()).unwrap();

    let audit = constants_audit(&AuditOptions::default()).unwrap();
    let constants = json!({
        "torus_constant": audit.torus.constant,
        "torus_constant_mean_convention": audit.torus.constant_mean_convention,
        "torus_closed_form": audit.torus.closed_form,
        "torus_displayed": audit.torus.displayed,
        "annulus_prefactor": audit.annulus_prefactor,
        "annulus_closed_form": audit.annulus_closed_form,
        "annulus_displayed": audit.annulus_displayed,
        "max_residual": audit.max_residual,
        "reproduce_tol": 1e-9,
    });
    std::fs::write(fixtures().join("constants.json"), serde_json::to_string_pretty(&constants).unwrap()).unwrap();
}
