//! Genus-2 double covers `Y → E` of `E: y² = x(x-b)(x-c)` with
//! `(P, I) = (1, 1)`, `(2, 2)` and `(1, 2)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::arith::{
    factor_u64, format_rational, legendre, prime_in_progression, ArithError, IntMod, Modulus, Place,
    Prime, Rational,
};
use crate::curve::{genus_of_model, CurveError, EllipticModel, HyperellipticModel};
use crate::divisor::{verify_case3_identity, DivisorError, FunctionSpec};
use crate::local::{
    deficiency_at_place, DeficiencyReport, Hypothesis, LocalError, PlaceCertificate, TwistParams,
    DEFAULT_PLACE_BOUND,
};
use crate::poly::Poly;
use crate::tower::{express_root, TowerDescription, TowerElement, TowerError, TowerField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForgeError {
    #[error("degenerate parameter a = {0}: f is not squarefree")]
    DegenerateParameter(String),
    #[error("{0} does not fit the 64-bit range used for factoring")]
    Overflow(String),
    #[error("construction check failed: {0}")]
    CheckFailed(String),
    #[error("divisor identity failed on the constructed instance")]
    IdentityFailed,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForgeCase {
    Case1,
    Case2,
    Case3,
}

impl ForgeCase {
    pub fn claimed(self) -> (u32, u32) {
        match self {
            ForgeCase::Case1 => (1, 1),
            ForgeCase::Case2 => (2, 2),
            ForgeCase::Case3 => (1, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeParams {
    pub elliptic: EllipticModel,
    pub case: ForgeCase,
    #[serde(with = "crate::serde_str::rat_opt", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<TwistParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForgeOptions {
    /// Good places up to this bound get explicit certificates.
    pub bound: u64,
    /// Ceiling for the search for `π`; `None` uses the default.
    pub ceiling: Option<u128>,
}

impl Default for ForgeOptions {
    fn default() -> Self {
        ForgeOptions {
            bound: DEFAULT_PLACE_BOUND,
            ceiling: None,
        }
    }
}

/// `E`'s cubic evaluated at `x(z)`, compared with `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapIdentity {
    #[serde(with = "crate::serde_str::rat_vec")]
    pub x_of_z: Vec<Rational>,
    pub holds: bool,
}

impl MapIdentity {
    pub fn check(e: &EllipticModel, x_of_z: &Poly<Rational>, f: &Poly<Rational>) -> Self {
        let cubic = e.cubic();
        let composed = cubic
            .coeffs()
            .iter()
            .rev()
            .fold(Poly::zero(), |acc: Poly<Rational>, c| acc.mul(x_of_z).add(&Poly::constant(c.clone())));
        MapIdentity {
            x_of_z: x_of_z.coeffs().to_vec(),
            holds: &composed == f,
        }
    }
}

/// Exactly one deficient place forces `P ∤ g - 1`, and emptiness over odd-degree
/// extensions at that place forces `I` even.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OddDeficiency {
    pub deficient_places: Vec<Place>,
    pub genus: u32,
    pub period_divides_g_minus_1: bool,
    pub index_even: bool,
}

/// Period 1 from a rational degree-3 class: `P | gcd(deg D, deg 𝒦) = gcd(3, 2) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorCertificate {
    pub field: TowerDescription,
    pub sigma: String,
    pub d_roots: Vec<Value>,
    pub function: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub identity_holds: bool,
    pub degree_d: i64,
    pub canonical_degree: i64,
    pub period_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveCertificates {
    pub map_identity: Option<MapIdentity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rational_points_at_infinity: Option<PlaceCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deficiency_report: Option<DeficiencyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd_deficiency: Option<OddDeficiency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_field: Option<TowerDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi_certificate: Option<PlaceCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub divisor_certificate: Option<DivisorCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genus2Curve {
    pub model: HyperellipticModel,
    pub params: ForgeParams,
    #[serde(with = "crate::serde_str")]
    pub claimed_period: u32,
    #[serde(with = "crate::serde_str")]
    pub claimed_index: u32,
    pub certificates: CurveCertificates,
}

fn abs_u64(n: &BigInt) -> Result<u64, ForgeError> {
    n.abs().to_u64().ok_or_else(|| ForgeError::Overflow(n.to_string()))
}

pub const SMALL_RESIDUE_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// `M = 2³ · 3·5·7·11·13 · ∏ p` over odd `p > 13` dividing `bc(b - c)`, with the
/// real sign condition.
pub fn build_modulus(e: &EllipticModel) -> Result<Modulus, ForgeError> {
    let mut primes: BTreeSet<u64> = SMALL_RESIDUE_PRIMES.into_iter().collect();
    for n in [e.b().clone(), e.c().clone(), e.b() - e.c()] {
        for (p, _) in factor_u64(abs_u64(&n)?) {
            primes.insert(p);
        }
    }
    let factors: Vec<(u64, u32)> = primes
        .into_iter()
        .map(|p| (p, if p == 2 { 3 } else { 1 }))
        .collect();
    Ok(Modulus::from_factors(&factors, true)?)
}

/// Least prime `π ≡ 1 (mod M)`.
pub fn find_pi(m: &Modulus, ceiling: Option<u128>) -> Result<Prime, ForgeError> {
    Ok(prime_in_progression(&BigInt::one(), m, &BTreeSet::new(), ceiling)?)
}

/// Least positive quadratic nonresidue modulo the odd prime `π`.
pub fn find_alpha(pi: Prime) -> Result<BigInt, ForgeError> {
    let mut a = BigInt::from(2);
    loop {
        if legendre(&a, pi)? == -1 {
            return Ok(a);
        }
        a += 1;
    }
}

fn rat(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

/// `(z² - t₁)(z² - t₂)(z² - t₃)`.
fn even_sextic(ts: &[Rational]) -> Poly<Rational> {
    let fs: Vec<Poly<Rational>> = ts
        .iter()
        .map(|t| Poly::new(vec![-t.clone(), Rational::zero(), Rational::one()]))
        .collect();
    Poly::product(&fs)
}

fn check_genus(model: &HyperellipticModel) -> Result<(), ForgeError> {
    match genus_of_model(model)? {
        2 => Ok(()),
        g => Err(ForgeError::CheckFailed(format!("genus {g}, expected 2"))),
    }
}

/// Smallest negative integer not in `{b, c}`.
pub fn default_a(e: &EllipticModel) -> Rational {
    let mut a = BigInt::from(-1);
    while &a == e.b() || &a == e.c() {
        a -= 1;
    }
    rat(&a)
}

/// `y² = (z² + a)(z² + a - b)(z² + a - c)`, with two rational points at infinity.
pub fn build_case1(e: &EllipticModel, a: Option<Rational>) -> Result<Genus2Curve, ForgeError> {
    let a = a.unwrap_or_else(|| default_a(e));
    let (b, c) = (rat(e.b()), rat(e.c()));
    if a.is_zero() || a == b || a == c {
        return Err(ForgeError::DegenerateParameter(format_rational(&a)));
    }
    let f = even_sextic(&[-a.clone(), &b - &a, &c - &a]);
    let model = HyperellipticModel::new(f)?;
    check_genus(&model)?;
    let map = MapIdentity::check(e, &Poly::new(vec![a.clone(), Rational::zero(), Rational::one()]), model.f());
    if !map.holds {
        return Err(ForgeError::CheckFailed("degree-2 map identity".into()));
    }
    let lc = model.leading();
    if !lc.is_one() {
        return Err(ForgeError::CheckFailed("leading coefficient is not 1".into()));
    }
    let infinity = PlaceCertificate {
        place: Place::Real,
        verdict: crate::local::Verdict::InfinityRational {
            leading_coefficient: format_rational(&lc),
        },
        deficient: false,
    };
    let (p, i) = ForgeCase::Case1.claimed();
    Ok(Genus2Curve {
        model,
        params: ForgeParams {
            elliptic: e.clone(),
            case: ForgeCase::Case1,
            a: Some(a),
            twist: None,
        },
        claimed_period: p,
        claimed_index: i,
        certificates: CurveCertificates {
            map_identity: Some(map),
            rational_points_at_infinity: Some(infinity),
            ..Default::default()
        },
    })
}

/// Modulus, `π` and `α` for `E`, with the construction's post-conditions checked.
pub fn twist_params(e: &EllipticModel, ceiling: Option<u128>) -> Result<TwistParams, ForgeError> {
    let modulus = build_modulus(e)?;
    let pi = find_pi(&modulus, ceiling)?;
    let alpha = find_alpha(pi)?;
    let params = TwistParams {
        elliptic: e.clone(),
        modulus,
        pi,
        alpha,
    };
    let pib = pi.big();
    if params.modulus.divides_by(pi.get()) {
        return Err(ForgeError::CheckFailed("pi divides M".into()));
    }
    if e.discriminant().mod_floor(&pib).is_zero() {
        return Err(ForgeError::CheckFailed("pi divides disc(E)".into()));
    }
    Ok(params)
}

fn twist_map(params: &TwistParams) -> Poly<Rational> {
    // x = (z² - α) / π
    let pi = rat(&params.pi.big());
    Poly::new(vec![-rat(&params.alpha) / &pi, Rational::zero(), Rational::one() / pi])
}

fn twist_model(params: &TwistParams) -> Result<(HyperellipticModel, MapIdentity), ForgeError> {
    let model = params.model();
    check_genus(&model)?;
    let map = MapIdentity::check(&params.elliptic, &twist_map(params), model.f());
    if !map.holds {
        return Err(ForgeError::CheckFailed("degree-2 map identity".into()));
    }
    Ok((model, map))
}

/// `y² = π⁻³(z² - α)(z² - α - πb)(z² - α - πc)`, deficient exactly at `π`.
pub fn build_case2(e: &EllipticModel, opts: ForgeOptions) -> Result<Genus2Curve, ForgeError> {
    let params = twist_params(e, opts.ceiling)?;
    let (model, map) = twist_model(&params)?;
    let report = DeficiencyReport::assemble(&params, opts.bound, &[])?;
    if report.deficient_places != vec![Place::Finite(params.pi)] {
        return Err(ForgeError::CheckFailed(format!(
            "deficient places {:?}, expected only pi",
            report.deficient_places
        )));
    }
    let odd = OddDeficiency {
        deficient_places: report.deficient_places.clone(),
        genus: 2,
        period_divides_g_minus_1: report.deficient_places.len() % 2 == 0,
        index_even: report.certificates.iter().any(|c| {
            matches!(
                c.verdict,
                crate::local::Verdict::EmptyByValuation {
                    odd_degree_extensions: true,
                    ..
                }
            )
        }),
    };
    let (p, i) = ForgeCase::Case2.claimed();
    Ok(Genus2Curve {
        model,
        params: ForgeParams {
            elliptic: e.clone(),
            case: ForgeCase::Case2,
            a: None,
            twist: Some(params),
        },
        claimed_period: p,
        claimed_index: i,
        certificates: CurveCertificates {
            map_identity: Some(map),
            deficiency_report: Some(report),
            odd_deficiency: Some(odd),
            ..Default::default()
        },
    })
}

/// Generator names: `u² = (α+πb)/α`, `v² = (α+πc)/α`, `w² = α`.
pub const CASE3_GENERATORS: [&str; 3] = ["u", "v", "w"];

/// The fields `K' = ℚ(u, v)` and `K'' = K'(w)` with the three roots
/// `√α = w`, `√(α+πb) = wu`, `√(α+πc) = wv`.
pub struct Case3Tower {
    pub k1: TowerField,
    pub k2: TowerField,
    pub roots: [TowerElement; 3],
}

pub fn case3_tower(params: &TwistParams) -> Result<Case3Tower, ForgeError> {
    let [t1, t2, t3] = params.radicands().map(|t| rat(&t));
    let r1 = &t2 / &t1;
    let r2 = &t3 / &t1;
    let q = TowerField::rationals();
    let [gu, gv, gw] = CASE3_GENERATORS;
    let k_u = q.extend(gu, &q.element(&r1))?;
    let k1 = k_u.extend(gv, &k_u.element(&r2))?;
    let k2 = k1.extend(gw, &k1.element(&t1))?;
    let w = k2.gen(gw)?;
    let roots = [
        w.clone(),
        crate::poly::FieldElem::mul(&w, &k2.gen(gu)?),
        crate::poly::FieldElem::mul(&w, &k2.gen(gv)?),
    ];
    for (r, t) in roots.iter().zip([&t1, &t2, &t3]) {
        if crate::poly::FieldElem::mul(r, r) != k2.element(t) {
            return Err(ForgeError::CheckFailed(format!("({r})^2 != {t}")));
        }
    }
    // All three roots generate the same quadratic extension of K'.
    for t in [&t2, &t3] {
        let prod = k1.element(&(&t1 * t));
        if express_root(&k1, &prod).is_none() {
            return Err(ForgeError::CheckFailed(format!(
                "alpha*({t}) is not a square in K'"
            )));
        }
    }
    Ok(Case3Tower { k1, k2, roots })
}

/// Both radicands are `≡ 1` and squares modulo `π`, so `π` splits completely in `K'`.
pub fn splitting_hypotheses(params: &TwistParams) -> Vec<Hypothesis> {
    let [t1, t2, t3] = params.radicands().map(|t| rat(&t));
    let m = IntMod::new(params.pi.big());
    let mut out = Vec::new();
    for (name, r) in [("first", &t2 / &t1), ("second", &t3 / &t1)] {
        let red = m.reduce(&r);
        out.push(Hypothesis::new(
            &format!("{name}_radicand_congruent_one_mod_pi"),
            red.as_ref().is_some_and(|x| x.is_one()),
            format!("{} mod pi", format_rational(&r)),
        ));
        let leg = red.map(|x| legendre(&x, params.pi).unwrap_or(0)).unwrap_or(0);
        out.push(Hypothesis::new(
            &format!("{name}_radicand_square_mod_pi"),
            leg == 1,
            format!("legendre = {leg}"),
        ));
    }
    out
}

/// The twisted model over `K'`: period 1 from the divisor identity, index 2 at the places over `π`.
pub fn build_case3(e: &EllipticModel, opts: ForgeOptions) -> Result<Genus2Curve, ForgeError> {
    let params = twist_params(e, opts.ceiling)?;
    let (model, map) = twist_model(&params)?;
    let tower = case3_tower(&params)?;
    let split = splitting_hypotheses(&params);
    let pi_cert = deficiency_at_place(&params, Place::Finite(params.pi), &split)?;
    let divisor = case3_divisor_certificate(&model, &tower)?;
    if !divisor.identity_holds {
        return Err(ForgeError::IdentityFailed);
    }
    let (p, i) = ForgeCase::Case3.claimed();
    Ok(Genus2Curve {
        model: model.base_extend(&tower.k1),
        params: ForgeParams {
            elliptic: e.clone(),
            case: ForgeCase::Case3,
            a: None,
            twist: Some(params),
        },
        claimed_period: p,
        claimed_index: i,
        certificates: CurveCertificates {
            map_identity: Some(map),
            split_field: Some(tower.k1.describe()),
            pi_certificate: Some(pi_cert),
            divisor_certificate: Some(divisor),
            ..Default::default()
        },
    })
}

pub fn case3_divisor_certificate(
    model: &HyperellipticModel,
    tower: &Case3Tower,
) -> Result<DivisorCertificate, ForgeError> {
    let over = model.base_extend(&tower.k2);
    let sigma = CASE3_GENERATORS[2];
    let check = verify_case3_identity(&over, sigma, &tower.roots)?;
    let degree_d = tower.roots.len() as i64;
    let canonical_degree = 2;
    Ok(DivisorCertificate {
        field: tower.k2.describe(),
        sigma: sigma.to_string(),
        d_roots: tower.roots.iter().map(|r| r.to_json()).collect(),
        function: FunctionSpec::y_over_product(&tower.roots).to_json(),
        lhs: check.lhs.to_json(),
        rhs: check.rhs.to_json(),
        identity_holds: check.holds,
        degree_d,
        canonical_degree,
        period_bound: degree_d.gcd(&canonical_degree),
    })
}

pub fn build(case: ForgeCase, e: &EllipticModel, a: Option<Rational>, opts: ForgeOptions) -> Result<Genus2Curve, ForgeError> {
    match case {
        ForgeCase::Case1 => build_case1(e, a),
        ForgeCase::Case2 => build_case2(e, opts),
        ForgeCase::Case3 => build_case3(e, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    fn e(b: i64, c: i64) -> EllipticModel {
        EllipticModel::new(b, c).unwrap()
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(build_modulus(&e(1, 2)).unwrap().value(), 120120);
        assert_eq!(build_modulus(&e(3, 5)).unwrap().value(), 120120);
        assert!(build_modulus(&e(1, 18)).unwrap().divides_by(17));
    }

    #[test]
    fn pi_and_alpha() {
        assert_eq!(find_pi(&Modulus::new(4, false).unwrap(), None).unwrap().get(), 5);
        assert_eq!(find_pi(&Modulus::new(1, false).unwrap(), None).unwrap().get(), 2);
        let m = build_modulus(&e(1, 2)).unwrap();
        assert_eq!(find_pi(&m, None).unwrap().get(), 120121);
        for (p, a) in [(7, 3), (5, 2), (17, 3), (120121, 19)] {
            assert_eq!(find_alpha(Prime::new(p).unwrap()).unwrap(), BigInt::from(a));
        }
    }

    #[test]
    fn case1() {
        let c = build_case1(&e(1, 2), Some(int(-3))).unwrap();
        let expect = even_sextic(&[int(3), int(4), int(5)]);
        assert_eq!(c.model.f(), &expect);
        assert_eq!((c.claimed_period, c.claimed_index), (1, 1));
        for a in [1, 0, 2] {
            assert!(matches!(
                build_case1(&e(1, 2), Some(int(a))),
                Err(ForgeError::DegenerateParameter(_))
            ));
        }
        assert_eq!(default_a(&e(-1, 2)), int(-2));
    }

    #[test]
    fn case3_tower_for_golden_instance() {
        let params = twist_params(&e(1, 2), None).unwrap();
        let t = case3_tower(&params).unwrap();
        assert_eq!(t.k2.degree(), 8);
        assert!(splitting_hypotheses(&params).iter().all(|h| h.holds));
        let cert = case3_divisor_certificate(&params.model(), &t).unwrap();
        assert!(cert.identity_holds);
        assert_eq!(cert.period_bound, 1);
    }
}
