//! JSON run configurations and their translation into library objects.

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use teichlab::beltsolve::SquareBox;
use teichlab::domains::Region;
use teichlab::extremal::{AuditOptions, CertifyOptions};
use teichlab::fields::{self, BeltramiField, LambdaParam, WeightSequences};
use teichlab::geodesics::FamilyKind;
use teichlab::qdiff::{qs_basis, QuadraticDifferential};

use crate::RunError;

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, RunError> {
    serde_json::from_str(text).map_err(|e| RunError::Config(format!("config: {e}")))
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn logistic() -> WeightSequences {
    WeightSequences::Logistic
}

/// A Beltrami field, either by name or spelled out in full.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    Example1 {
        k: f64,
        #[serde(default = "logistic")]
        weights: WeightSequences,
    },
    /// The weighted field with weights `(1, 0)` on every cell.
    TeichmullerLift { k: f64 },
    RadialStretch {
        dilatation: f64,
        #[serde(default = "zero")]
        center: C64,
        radius: f64,
    },
    StripShear { lambda: C64, height: f64 },
    RingShear {
        lambda: C64,
        #[serde(default = "zero")]
        center: C64,
        inner: f64,
        outer: f64,
    },
    Explicit { field: BeltramiField },
}

impl FieldSpec {
    pub fn build(&self) -> teichlab::Result<BeltramiField> {
        match self {
            FieldSpec::Zero => Ok(BeltramiField::zero(Region::PlaneMinusIntegers)),
            FieldSpec::Example1 { k, weights } => fields::example1_field(*k, *weights, qs_basis()?),
            FieldSpec::TeichmullerLift { k } => {
                fields::example1_field(*k, WeightSequences::constant(1.0, 0.0)?, qs_basis()?)
            }
            FieldSpec::RadialStretch { dilatation, center, radius } => {
                fields::radial_stretch(*dilatation, *center, *radius)
            }
            FieldSpec::StripShear { lambda, height } => fields::strip_family(LambdaParam::new(*lambda)?, *height),
            FieldSpec::RingShear { lambda, center, inner, outer } => {
                fields::ring_family(LambdaParam::new(*lambda)?, *center, *inner, *outer)
            }
            FieldSpec::Explicit { field } => Ok(field.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisElement {
    PhiR,
    PhiL,
}

impl BasisElement {
    pub fn build(self) -> teichlab::Result<QuadraticDifferential> {
        let b = qs_basis()?;
        Ok(match self {
            BasisElement::PhiR => b.phi_r,
            BasisElement::PhiL => b.phi_l,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypothesis {
    pub differential: BasisElement,
    pub k: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub field: FieldSpec,
    pub hypothesis: Hypothesis,
    pub n: i64,
    #[serde(default = "CertifyConfig::default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub options: CertifyOptions,
}

impl CertifyConfig {
    fn default_tol() -> f64 {
        0.02
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default)]
    pub audit: AuditOptions,
    /// Largest accepted fit residual.
    #[serde(default = "AuditConfig::default_tol")]
    pub tol: f64,
}

impl AuditConfig {
    fn default_tol() -> f64 {
        1e-6
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    #[serde(default = "zero")]
    pub center: C64,
    pub half: f64,
}

impl From<BoxSpec> for SquareBox {
    fn from(b: BoxSpec) -> Self {
        SquareBox::centered(b.center, b.half)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub field: FieldSpec,
    pub n: usize,
    #[serde(rename = "box")]
    pub bbox: BoxSpec,
    #[serde(default = "SolveConfig::default_tol")]
    pub tol: f64,
    #[serde(default = "SolveConfig::default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "SolveConfig::default_supersample")]
    pub supersample: usize,
    #[serde(default)]
    pub normalize: bool,
    /// Points that a trivial field must leave fixed.
    #[serde(default)]
    pub punctures: Vec<C64>,
    /// Bound on the grid error against the closed form and on the puncture
    /// displacement.
    #[serde(default = "SolveConfig::default_check_tol")]
    pub check_tol: f64,
}

impl SolveConfig {
    fn default_tol() -> f64 {
        1e-10
    }
    fn default_max_iter() -> usize {
        200
    }
    fn default_supersample() -> usize {
        8
    }
    fn default_check_tol() -> f64 {
        1e-3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKindSpec {
    Disk,
    PuncturedDisk,
    Annulus,
    /// Annuli around `3j + 3/2`, `|j| <= L`.
    String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: FamilyKindSpec,
    /// Patch region for the single-patch kinds.
    #[serde(default)]
    pub region: Option<Region>,
    pub t0: f64,
    /// Background field; the logistic weighted field with `k = t0` if absent.
    #[serde(default)]
    pub base: Option<FieldSpec>,
    /// Bound on `|λ|` for strings; the distinguished parameter if absent.
    #[serde(default)]
    pub bound: Option<f64>,
}

impl FamilySpec {
    pub fn base(&self) -> teichlab::Result<BeltramiField> {
        match &self.base {
            Some(b) => b.build(),
            None => fields::example1_field(self.t0, WeightSequences::Logistic, qs_basis()?),
        }
    }

    pub fn single_kind(&self) -> Option<FamilyKind> {
        match self.kind {
            FamilyKindSpec::Disk => Some(FamilyKind::Disk),
            FamilyKindSpec::PuncturedDisk => Some(FamilyKind::PuncturedDisk),
            FamilyKindSpec::Annulus => Some(FamilyKind::Annulus),
            FamilyKindSpec::String => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: FamilySpec,
    /// Parameters for single-patch families.
    #[serde(default)]
    pub lambdas: Vec<C64>,
    /// Parameter strings for string families, each of odd length `2L + 1`.
    #[serde(default)]
    pub sequences: Vec<Vec<C64>>,
    /// Random points used to check `|μ| = t0` at the distinguished parameter.
    #[serde(default = "FamilyConfig::default_samples")]
    pub samples: usize,
}

impl FamilyConfig {
    fn default_samples() -> usize {
        1000
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparateConfig {
    pub family: FamilySpec,
    pub lambda1: C64,
    pub lambda2: C64,
    /// Truncation of the dictionary strings.
    #[serde(default = "SeparateConfig::default_l")]
    pub dictionary_l: i64,
    pub threshold: f64,
}

impl SeparateConfig {
    fn default_l() -> i64 {
        2
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverConfig {
    pub t0: f64,
    /// `λ_j` for `j = -L..=L`.
    pub lambdas: Vec<C64>,
    #[serde(default)]
    pub bound: Option<f64>,
    /// Fixed pairing prefactor; calibrated from a reference run if absent.
    #[serde(default)]
    pub prefactor: Option<C64>,
    #[serde(default = "RecoverConfig::default_tol")]
    pub tol: f64,
}

impl RecoverConfig {
    fn default_tol() -> f64 {
        1e-6
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoConfig {
    /// Slit half-lengths to map to strip heights and back.
    #[serde(default)]
    pub half_lengths: Vec<f64>,
    /// Strip heights to map to half-lengths and back.
    #[serde(default = "RhoConfig::default_heights")]
    pub heights: Vec<f64>,
    #[serde(default = "RhoConfig::default_tol")]
    pub tol: f64,
    /// Accepted gap between the slit and contour forms of the period integral.
    #[serde(default = "RhoConfig::default_cross_tol")]
    pub cross_tol: f64,
}

impl RhoConfig {
    fn default_heights() -> Vec<f64> {
        vec![1.0, 2.0, 4.0]
    }
    fn default_tol() -> f64 {
        1e-6
    }
    fn default_cross_tol() -> f64 {
        1e-4
    }
}
