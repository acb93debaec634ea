//! Certificate bundles: single JSON documents holding the inputs, every
//! artifact produced from them, and the conclusions those artifacts support.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{Place, Rational};
use crate::calculus::{check_trace, classify_case, derive_period_index, CalculusError, Case, DerivationTrace, Triple};
use crate::curve::EllipticModel;
use crate::forge::{
    build, case3_divisor_certificate, case3_tower, splitting_hypotheses, ForgeCase, ForgeError, ForgeOptions,
    Genus2Curve, MapIdentity,
};
use crate::local::{infinity_rational, PlaceCertificate, Verdict, DEFAULT_PLACE_BOUND};
use crate::poly::Poly;

pub const SCHEMA_VERSION: &str = "pix/1";
/// Overrides the default ceiling of the search for `π`.
pub const SEARCH_CEILING_ENV: &str = "PIX_SEARCH_CEILING";

#[derive(Debug, Error)]
pub enum CertError {
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("bundle does not parse: {0}")]
    Parse(String),
    #[error("invalid {SEARCH_CEILING_ENV}: {0}")]
    Env(String),
    #[error("self-check failed: {}", .0.join("; "))]
    SelfCheck(Vec<String>),
}

pub fn search_ceiling_from_env() -> Result<Option<u128>, CertError> {
    match std::env::var(SEARCH_CEILING_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| CertError::Env(s)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CertError::Env(e.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeInputs {
    pub case: ForgeCase,
    #[serde(with = "crate::serde_str")]
    pub b: BigInt,
    #[serde(with = "crate::serde_str")]
    pub c: BigInt,
    #[serde(with = "crate::serde_str::rat_opt", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Rational>,
    #[serde(with = "crate::serde_str")]
    pub bound: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_ceiling: Option<String>,
}

impl ForgeInputs {
    pub fn new(case: ForgeCase, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Self {
        ForgeInputs {
            case,
            b: b.into(),
            c: c.into(),
            a: None,
            bound: DEFAULT_PLACE_BOUND,
            search_ceiling: None,
        }
    }

    fn options(&self) -> Result<ForgeOptions, CertError> {
        let ceiling = match &self.search_ceiling {
            Some(s) => Some(s.parse().map_err(|_| CertError::Env(s.clone()))?),
            None => None,
        };
        Ok(ForgeOptions { bound: self.bound, ceiling })
    }

    fn elliptic(&self) -> Result<EllipticModel, CertError> {
        Ok(EllipticModel::new(self.b.clone(), self.c.clone()).map_err(ForgeError::from)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineInputs {
    pub triple: Triple,
    /// The genus-2 ingredient; its case follows from the triple.
    pub forge: ForgeInputs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum BundleInputs {
    Forge(ForgeInputs),
    Pipeline(PipelineInputs),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Artifacts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<Genus2Curve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation_trace: Option<DerivationTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusions {
    #[serde(with = "crate::serde_str")]
    pub genus: u64,
    #[serde(with = "crate::serde_str")]
    pub period: u64,
    #[serde(with = "crate::serde_str")]
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub version: String,
    pub inputs: BundleInputs,
    pub artifacts: Artifacts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusions: Option<Conclusions>,
    pub deviations: Vec<String>,
}

impl CertificateBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, CertError> {
        serde_json::from_str(s).map_err(|e| CertError::Parse(e.to_string()))
    }
}

const DEV_MODULUS: &str =
    "the modulus also includes the odd primes above 13 dividing b - c, so E has good reduction at pi";
const DEV_INDEX_BOUND: &str =
    "index upper bound taken as I(Y) | m·I(X)·I(Y'), the degree of Y -> Y' times I(Y')";
const DEV_DEFAULT_A: &str = "a not supplied; used the smallest negative integer outside {b, c}";

fn curve_deviations(inputs: &ForgeInputs) -> Vec<String> {
    let mut out = Vec::new();
    match inputs.case {
        ForgeCase::Case1 if inputs.a.is_none() => out.push(DEV_DEFAULT_A.to_string()),
        ForgeCase::Case1 => {}
        ForgeCase::Case2 | ForgeCase::Case3 => out.push(DEV_MODULUS.to_string()),
    }
    out
}

/// Forge the curve described by `inputs` and assemble its bundle.
pub fn forge_bundle(inputs: &ForgeInputs) -> Result<CertificateBundle, CertError> {
    let e = inputs.elliptic()?;
    let curve = build(inputs.case, &e, inputs.a.clone(), inputs.options()?)?;
    let (period, index) = (curve.claimed_period as u64, curve.claimed_index as u64);
    let mut bundle = CertificateBundle {
        version: SCHEMA_VERSION.to_string(),
        inputs: BundleInputs::Forge(inputs.clone()),
        artifacts: Artifacts {
            curve: Some(curve),
            derivation_trace: None,
        },
        conclusions: None,
        deviations: curve_deviations(inputs),
    };
    seal(&mut bundle, Conclusions { genus: 2, period, index })?;
    Ok(bundle)
}

/// The genus-2 construction used for each case of the higher-genus argument.
pub fn ingredient_case(case: Case) -> ForgeCase {
    match case {
        Case::I => ForgeCase::Case1,
        Case::Ii => ForgeCase::Case3,
        Case::Iii => ForgeCase::Case2,
    }
}

/// Classify `triple`, forge the matching genus-2 ingredient from `E(b, c)`
/// and derive `(P(Y), I(Y), g(Y))`.
pub fn pipeline_bundle(
    triple: Triple,
    b: impl Into<BigInt>,
    c: impl Into<BigInt>,
    a: Option<Rational>,
    bound: u64,
    search_ceiling: Option<u128>,
) -> Result<CertificateBundle, CertError> {
    let case = classify_case(triple)?;
    let forge = ForgeInputs {
        case: ingredient_case(case),
        b: b.into(),
        c: c.into(),
        a,
        bound,
        search_ceiling: search_ceiling.map(|n| n.to_string()),
    };
    pipeline_from_inputs(&PipelineInputs { triple, forge })
}

fn pipeline_from_inputs(inputs: &PipelineInputs) -> Result<CertificateBundle, CertError> {
    let case = classify_case(inputs.triple)?;
    if ingredient_case(case) != inputs.forge.case {
        return Err(CertError::SelfCheck(vec![format!(
            "case {case} needs the {:?} ingredient",
            ingredient_case(case)
        )]));
    }
    let trace = derive_period_index(inputs.triple)?;
    let e = inputs.forge.elliptic()?;
    let curve = build(inputs.forge.case, &e, inputs.forge.a.clone(), inputs.forge.options()?)?;
    let mut deviations = curve_deviations(&inputs.forge);
    deviations.push(DEV_INDEX_BOUND.to_string());
    let t = inputs.triple;
    let mut bundle = CertificateBundle {
        version: SCHEMA_VERSION.to_string(),
        inputs: BundleInputs::Pipeline(inputs.clone()),
        artifacts: Artifacts {
            curve: Some(curve),
            derivation_trace: Some(trace),
        },
        conclusions: None,
        deviations,
    };
    seal(&mut bundle, Conclusions { genus: t.g, period: t.p, index: t.i })?;
    Ok(bundle)
}

/// Attach conclusions only once every artifact passes the independent checks.
fn seal(bundle: &mut CertificateBundle, conclusions: Conclusions) -> Result<(), CertError> {
    bundle.conclusions = Some(conclusions);
    let failures: Vec<String> = recheck(bundle).into_iter().filter(|c| !c.ok).map(|c| c.to_string()).collect();
    if !failures.is_empty() {
        bundle.conclusions = None;
        return Err(CertError::SelfCheck(failures));
    }
    Ok(())
}

/// Rebuild a bundle from its recorded inputs.
pub fn regenerate(inputs: &BundleInputs) -> Result<CertificateBundle, CertError> {
    match inputs {
        BundleInputs::Forge(f) => forge_bundle(f),
        BundleInputs::Pipeline(p) => pipeline_from_inputs(p),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.ok { "ok  " } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

struct Checks(Vec<CheckLine>);

impl Checks {
    fn add(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.0.push(CheckLine { name: name.into(), ok, detail: detail.into() });
    }
}

fn forge_inputs(inputs: &BundleInputs) -> &ForgeInputs {
    match inputs {
        BundleInputs::Forge(f) => f,
        BundleInputs::Pipeline(p) => &p.forge,
    }
}

fn twist_map(alpha: &BigInt, pi: &BigInt) -> Poly<Rational> {
    let pi = Rational::from_integer(pi.clone());
    Poly::new(vec![
        -Rational::from_integer(alpha.clone()) / &pi,
        Rational::from_integer(0.into()),
        Rational::from_integer(1.into()) / pi,
    ])
}

fn check_place(cert: &PlaceCertificate, curve: &Genus2Curve, checks: &mut Checks, extra: &[crate::local::Hypothesis]) {
    let name = format!("place {}", cert.place);
    if !cert.consistent() {
        checks.add(&name, false, "verdict and deficiency flag disagree");
        return;
    }
    let Some(twist) = &curve.params.twist else {
        checks.add(&name, false, "no twist parameters recorded");
        return;
    };
    let h = twist.model();
    match &cert.verdict {
        Verdict::PointFound { witness, .. } => {
            let Place::Finite(p) = cert.place else {
                checks.add(&name, false, "point witness at an archimedean place");
                return;
            };
            let s = h.minimal_scaling(p.get());
            let scaled = h.f().scale(&Rational::from_integer(p.big().pow(2 * s)));
            let ok = witness.p == p && witness.precision >= 3 && witness.satisfies(&scaled);
            checks.add(&name, ok, format!("witness mod {}^{}", p, witness.precision));
        }
        Verdict::InfinityRational { .. } => {
            let ok = infinity_rational(&h, cert.place).unwrap_or(false);
            checks.add(&name, ok, "leading coefficient is a local square");
        }
        Verdict::EmptyByValuation { hypotheses, .. } => {
            let mut expected = twist.pi_hypotheses();
            expected.extend_from_slice(extra);
            let ok = cert.place == Place::Finite(twist.pi);
            checks.add(&name, ok, "valuation argument applies only at pi");
            for h in &expected {
                checks.add(&format!("hypothesis {}", h.name), h.holds, h.detail.clone());
            }
            checks.add(&name, hypotheses == &expected, "recorded hypotheses match recomputation");
        }
        Verdict::EmptyByPadicSearch { .. } => {
            checks.add(&name, true, "search evidence, not deficient");
        }
    }
}

fn check_curve(curve: &Genus2Curve, inputs: &ForgeInputs, checks: &mut Checks) {
    let e_ok = curve.params.elliptic.b() == &inputs.b && curve.params.elliptic.c() == &inputs.c;
    checks.add("inputs", e_ok && curve.params.case == inputs.case, "curve parameters echo the inputs");
    if inputs.case == ForgeCase::Case1 && inputs.a.is_some() {
        checks.add("inputs", curve.params.a == inputs.a, "a echoes the input");
    }
    let claimed = inputs.case.claimed();
    checks.add(
        "claimed invariants",
        (curve.claimed_period, curve.claimed_index) == claimed,
        format!("(P, I) = ({}, {})", curve.claimed_period, curve.claimed_index),
    );
    let certs = &curve.certificates;
    let e = &curve.params.elliptic;

    let expected_map = match (&curve.params.case, &curve.params.a, &curve.params.twist) {
        (ForgeCase::Case1, Some(a), _) => Some(Poly::new(vec![
            a.clone(),
            Rational::from_integer(0.into()),
            Rational::from_integer(1.into()),
        ])),
        (ForgeCase::Case2 | ForgeCase::Case3, _, Some(t)) => Some(twist_map(&t.alpha, &t.pi.big())),
        _ => None,
    };
    match (expected_map, &certs.map_identity) {
        (Some(x), Some(m)) => {
            let again = MapIdentity::check(e, &x, curve.model.f());
            checks.add("map identity", again.holds && m.holds && m.x_of_z == x.coeffs(), "E(x(z)) = f(z)");
        }
        _ => checks.add("map identity", false, "missing map or parameters"),
    }

    match curve.params.case {
        ForgeCase::Case1 => {
            let ok = certs
                .rational_points_at_infinity
                .as_ref()
                .is_some_and(|c| c.consistent() && infinity_rational(&curve.model, Place::Real).unwrap_or(false));
            checks.add("points at infinity", ok && curve.model.leading() == Rational::from_integer(1.into()), "leading coefficient 1");
        }
        ForgeCase::Case2 | ForgeCase::Case3 => {
            let Some(twist) = &curve.params.twist else {
                checks.add("twist", false, "missing twist parameters");
                return;
            };
            let rational = twist.model();
            let model_ok = curve.model.f() == rational.f();
            checks.add("model", model_ok, "f = pi^-3 (z^2 - alpha)(z^2 - alpha - pi b)(z^2 - alpha - pi c)");
            for h in twist.pi_hypotheses() {
                checks.add(&format!("hypothesis {}", h.name), h.holds, h.detail);
            }
            if curve.params.case == ForgeCase::Case2 {
                check_case2(curve, inputs, checks);
            } else {
                check_case3(curve, checks);
            }
        }
    }
}

fn check_case2(curve: &Genus2Curve, inputs: &ForgeInputs, checks: &mut Checks) {
    let certs = &curve.certificates;
    let (Some(report), Some(twist)) = (&certs.deficiency_report, &curve.params.twist) else {
        checks.add("deficiency report", false, "missing");
        return;
    };
    checks.add("deficiency report", report.model.f() == twist.model().f(), "report model matches");
    for c in &report.certificates {
        check_place(c, curve, checks, &[]);
    }
    let deficient: Vec<Place> = report.certificates.iter().filter(|c| c.deficient).map(|c| c.place).collect();
    checks.add(
        "deficient places",
        deficient == report.deficient_places && deficient == vec![Place::Finite(twist.pi)],
        format!("{:?}", report.deficient_places),
    );
    let covered = crate::arith::primes_up_to(inputs.bound)
        .into_iter()
        .all(|p| report.certificates.iter().any(|c| c.place == Place::Finite(crate::arith::Prime::new(p).expect("prime"))));
    checks.add("coverage", covered && report.residual_claim.enumerated_up_to == inputs.bound, format!("every prime up to {}", inputs.bound));
    for h in &report.residual_claim.hypotheses {
        checks.add(&format!("residual {}", h.name), h.holds, h.detail.clone());
    }
    let odd = certs.odd_deficiency.as_ref();
    checks.add(
        "odd deficiency",
        odd.is_some_and(|o| o.deficient_places.len() % 2 == 1 && !o.period_divides_g_minus_1 && o.index_even),
        "one deficient place: P = 2, I = 2",
    );
}

fn check_case3(curve: &Genus2Curve, checks: &mut Checks) {
    let certs = &curve.certificates;
    let Some(twist) = &curve.params.twist else { return };
    let split = splitting_hypotheses(twist);
    for h in &split {
        checks.add(&format!("hypothesis {}", h.name), h.holds, h.detail.clone());
    }
    match &certs.pi_certificate {
        Some(c) => check_place(c, curve, checks, &split),
        None => checks.add("pi certificate", false, "missing"),
    }
    let recomputed = case3_tower(twist).and_then(|t| {
        checks.add("split field", certs.split_field.as_ref() == Some(&t.k1.describe()), "K' = Q(u, v)");
        case3_divisor_certificate(&twist.model(), &t)
    });
    match (recomputed, &certs.divisor_certificate) {
        (Ok(again), Some(rec)) => {
            checks.add("divisor identity", again.identity_holds && rec.identity_holds, "div(y / prod(z - r)) = sigma D - D");
            checks.add("divisor certificate", &again == rec, "recorded divisors match recomputation");
            checks.add("period bound", rec.period_bound == 1 && rec.degree_d == 3, "P | gcd(3, 2) = 1");
        }
        (Err(e), _) => checks.add("divisor identity", false, e.to_string()),
        (_, None) => checks.add("divisor certificate", false, "missing"),
    }
}

/// Independent re-checks of every artifact in the bundle.
pub fn recheck(bundle: &CertificateBundle) -> Vec<CheckLine> {
    let mut checks = Checks(Vec::new());
    checks.add("schema", bundle.version == SCHEMA_VERSION, format!("version {}", bundle.version));
    let inputs = forge_inputs(&bundle.inputs);
    match &bundle.artifacts.curve {
        Some(curve) => check_curve(curve, inputs, &mut checks),
        None => checks.add("curve", false, "missing"),
    }
    let concl = bundle.conclusions;
    match &bundle.inputs {
        BundleInputs::Forge(f) => {
            let (p, i) = f.case.claimed();
            let ok = concl == Some(Conclusions { genus: 2, period: p as u64, index: i as u64 });
            checks.add("conclusions", ok, format!("genus 2, (P, I) = ({p}, {i})"));
            checks.add("derivation trace", bundle.artifacts.derivation_trace.is_none(), "absent for forge bundles");
        }
        BundleInputs::Pipeline(pi) => {
            let t = pi.triple;
            match classify_case(t) {
                Ok(case) => checks.add("ingredient", ingredient_case(case) == pi.forge.case, format!("case {case}")),
                Err(e) => checks.add("ingredient", false, e.to_string()),
            }
            match &bundle.artifacts.derivation_trace {
                Some(trace) => {
                    checks.add("derivation trace", trace.triple == t, "trace triple matches inputs");
                    match check_trace(trace) {
                        Ok(r) => checks.add("derivation trace", true, format!("{} steps re-verified", r.steps_checked)),
                        Err(e) => checks.add("derivation trace", false, e.to_string()),
                    }
                    if let Some(curve) = &bundle.artifacts.curve {
                        let y2 = trace.records.iter().find(|r| r.label == "Y'");
                        let ok = y2.is_some_and(|r| {
                            (r.period, r.index) == (curve.claimed_period as u64, curve.claimed_index as u64)
                        });
                        checks.add("ingredient invariants", ok, "Y' record matches the forged curve");
                    }
                }
                None => checks.add("derivation trace", false, "missing"),
            }
            let ok = concl == Some(Conclusions { genus: t.g, period: t.p, index: t.i });
            checks.add("conclusions", ok, format!("{t}"));
        }
    }
    checks.0
}

/// Re-check every artifact, then rebuild the bundle from its inputs and
/// require a byte-identical serialization.
pub fn verify_bundle(bundle: &CertificateBundle) -> VerifyReport {
    let mut checks = recheck(bundle);
    if bundle.version == SCHEMA_VERSION {
        let line = match regenerate(&bundle.inputs) {
            Ok(again) => {
                let same = again.to_json() == bundle.to_json();
                CheckLine {
                    name: "rerun".into(),
                    ok: same,
                    detail: if same { "identical".into() } else { "regenerated bundle differs".into() },
                }
            }
            Err(e) => CheckLine { name: "rerun".into(), ok: false, detail: e.to_string() },
        };
        checks.push(line);
    }
    VerifyReport { checks }
}

pub fn read_bundle(path: &Path) -> Result<CertificateBundle, CertError> {
    let text = fs::read_to_string(path).map_err(|e| CertError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    CertificateBundle::from_json(&text)
}

/// Write through a sibling temporary file and rename into place.
pub fn write_bundle(path: &Path, bundle: &CertificateBundle) -> Result<(), CertError> {
    let io = |e: std::io::Error| CertError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "bundle".into());
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bundle.to_json().as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
