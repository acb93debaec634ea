//! Divisors of functions `y^m · g(z) / h(z)` on degree-6 models `y² = f(z)`
//! over a tower field.
//!
//! Orders are read off structurally: a root `r` of `g` with `f(r) ≠ 0` gives
//! the two points `(r, ±√f(r))`, a root with `f(r) = 0` gives the Weierstrass
//! point `(r, 0)` twice, and each linear factor of `z` has polar divisor `𝒦`,
//! the sum of the two points at infinity.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;
use thiserror::Error;

use crate::curve::HyperellipticModel;
use crate::poly::{FieldElem, Poly};
use crate::tower::{express_root, TowerElement, TowerError, TowerField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivisorError {
    #[error("roots of {0} do not lie in the tower")]
    RootsNotInTower(String),
    #[error("f({0}) has no square root in the tower")]
    OrdinateNotInTower(String),
    #[error("only degree-6 models are supported, got degree {0}")]
    UnsupportedDegree(usize),
    #[error("model is singular at z = {0}")]
    SingularModel(String),
    #[error("zero function has no divisor")]
    ZeroFunction,
    #[error("principal divisor has degree {0}")]
    NonzeroDegree(i64),
    #[error("({0}, {1}) is not on the model")]
    NotOnCurve(String, String),
    #[error("malformed divisor encoding: {0}")]
    Malformed(String),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CurvePoint {
    Affine { z: TowerElement, y: TowerElement },
    InfinityPlus,
    InfinityMinus,
}

impl CurvePoint {
    pub fn affine(z: TowerElement, y: TowerElement) -> Self {
        CurvePoint::Affine { z, y }
    }

    pub fn weierstrass(z: TowerElement) -> Self {
        CurvePoint::Affine {
            z,
            y: TowerElement::from_int(0),
        }
    }

    /// The hyperelliptic involution `(z, y) ↦ (z, -y)`, swapping the points at infinity.
    pub fn involution(&self) -> Self {
        match self {
            CurvePoint::Affine { z, y } => CurvePoint::affine(z.clone(), y.neg()),
            CurvePoint::InfinityPlus => CurvePoint::InfinityMinus,
            CurvePoint::InfinityMinus => CurvePoint::InfinityPlus,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            CurvePoint::Affine { z, y } => serde_json::json!({
                "kind": "affine",
                "z": z.to_json(),
                "y": y.to_json(),
            }),
            CurvePoint::InfinityPlus => serde_json::json!({ "kind": "infinity_plus" }),
            CurvePoint::InfinityMinus => serde_json::json!({ "kind": "infinity_minus" }),
        }
    }

    fn from_json(field: &TowerField, v: &Value) -> Result<Self, DivisorError> {
        let bad = || DivisorError::Malformed(v.to_string());
        match v.get("kind").and_then(Value::as_str).ok_or_else(bad)? {
            "affine" => {
                let z = field.element_from_json(v.get("z").ok_or_else(bad)?)?;
                let y = field.element_from_json(v.get("y").ok_or_else(bad)?)?;
                Ok(CurvePoint::affine(z, y))
            }
            "infinity_plus" => Ok(CurvePoint::InfinityPlus),
            "infinity_minus" => Ok(CurvePoint::InfinityMinus),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Affine { z, y } => write!(f, "({z}, {y})"),
            CurvePoint::InfinityPlus => write!(f, "inf+"),
            CurvePoint::InfinityMinus => write!(f, "inf-"),
        }
    }
}

/// A finite formal sum of points; zero multiplicities are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Divisor {
    terms: BTreeMap<CurvePoint, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point(p: CurvePoint, n: i64) -> Self {
        let mut d = Self::zero();
        d.add_point(p, n);
        d
    }

    /// `𝒦 = ∞₊ + ∞₋`.
    pub fn canonical() -> Self {
        let mut d = Self::point(CurvePoint::InfinityPlus, 1);
        d.add_point(CurvePoint::InfinityMinus, 1);
        d
    }

    pub fn add_point(&mut self, p: CurvePoint, n: i64) {
        let e = self.terms.entry(p).or_insert(0);
        *e += n;
        if *e == 0 {
            self.terms.retain(|_, m| *m != 0);
        }
    }

    pub fn add(&self, other: &Divisor) -> Divisor {
        let mut d = self.clone();
        for (p, n) in &other.terms {
            d.add_point(p.clone(), *n);
        }
        d
    }

    pub fn sub(&self, other: &Divisor) -> Divisor {
        self.add(&other.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Divisor {
        if k == 0 {
            return Divisor::zero();
        }
        Divisor {
            terms: self.terms.iter().map(|(p, n)| (p.clone(), n * k)).collect(),
        }
    }

    pub fn degree(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CurvePoint, i64)> {
        self.terms.iter().map(|(p, n)| (p, *n))
    }

    pub fn multiplicity(&self, p: &CurvePoint) -> i64 {
        self.terms.get(p).copied().unwrap_or(0)
    }

    pub fn map_points(&self, f: impl Fn(&CurvePoint) -> CurvePoint) -> Divisor {
        let mut d = Divisor::zero();
        for (p, n) in &self.terms {
            d.add_point(f(p), *n);
        }
        d
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(p, n)| serde_json::json!({ "point": p.to_json(), "multiplicity": n }))
                .collect(),
        )
    }

    pub fn from_json(field: &TowerField, v: &Value) -> Result<Self, DivisorError> {
        let bad = || DivisorError::Malformed(v.to_string());
        let mut d = Divisor::zero();
        for t in v.as_array().ok_or_else(bad)? {
            let p = CurvePoint::from_json(field, t.get("point").ok_or_else(bad)?)?;
            let n = t.get("multiplicity").and_then(Value::as_i64).ok_or_else(bad)?;
            if n == 0 {
                return Err(bad());
            }
            d.add_point(p, n);
        }
        Ok(d)
    }

    /// Whether every affine support point lies on the model.
    pub fn on_model(&self, model: &HyperellipticModel) -> bool {
        self.terms.keys().all(|p| match p {
            CurvePoint::Affine { z, y } => model.contains_tower(z, y),
            _ => true,
        })
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (p, n)) in self.terms.iter().enumerate() {
            let sep = match (i, *n < 0) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            let k = n.abs();
            if k == 1 {
                write!(f, "{sep}{p}")?;
            } else {
                write!(f, "{sep}{k}{p}")?;
            }
        }
        Ok(())
    }
}

pub fn format_tower_poly(g: &Poly<TowerElement>) -> String {
    if g.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (i, c) in g.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => "z".into(),
            _ => format!("z^{i}"),
        };
        let cs = c.to_string();
        let term = if mono.is_empty() {
            cs
        } else if cs == "1" {
            mono
        } else if cs.contains(' ') {
            format!("({cs})*{mono}")
        } else {
            format!("{cs}*{mono}")
        };
        parts.push(term);
    }
    parts.join(" + ").replace("+ -", "- ")
}

/// Roots of a monic squarefree polynomial, all in `field`.
fn split_squarefree(
    q: &Poly<TowerElement>,
    field: &TowerField,
) -> Result<Vec<TowerElement>, Poly<TowerElement>> {
    let q = q.monic();
    match q.degree().unwrap_or(0) {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![q.coeff(0).neg()]),
        2 => {
            let (b, c) = (q.coeff(1), q.coeff(0));
            let disc = b.mul(&b).sub(&c.mul(&TowerElement::from_int(4)));
            let s = express_root(field, &disc).ok_or_else(|| q.clone())?;
            let half = TowerElement::from_int(2).inv().expect("2 is invertible");
            let r1 = b.neg().add(&s).mul(&half);
            let r2 = b.neg().sub(&s).mul(&half);
            return Ok(vec![r1, r2]);
        }
        _ => {}
    }
    if q.is_even() {
        let h = q.even_part();
        let inner = split_squarefree(&h, field).map_err(|bad| bad.compose_square())?;
        let mut roots = Vec::with_capacity(2 * inner.len());
        for rho in inner {
            let s = express_root(field, &rho)
                .ok_or_else(|| Poly::new(vec![rho.neg(), TowerElement::from_int(0), TowerElement::from_int(1)]))?;
            roots.push(s.neg());
            roots.push(s);
        }
        return Ok(roots);
    }
    let rational: Option<Vec<_>> = q.coeffs().iter().map(TowerElement::as_rational).collect();
    if let Some(cs) = rational {
        let qr = Poly::new(cs);
        let found = qr.rational_roots();
        if !found.is_empty() {
            let mut rest = q.clone();
            let mut roots = Vec::new();
            for (r, _) in found {
                let r = TowerElement::from_rational(&r);
                rest = rest.div_rem(&Poly::linear(&r)).0;
                roots.push(r);
            }
            roots.extend(split_squarefree(&rest, field)?);
            return Ok(roots);
        }
        return Err(q);
    }
    split_by_norm(&q, field).ok_or(q)
}

/// Roots of `q` among the roots of its norm `∏_σ σ(q) ∈ ℚ[z]`, where `σ` runs
/// over the sign changes of the generators.
fn split_by_norm(q: &Poly<TowerElement>, field: &TowerField) -> Option<Vec<TowerElement>> {
    let mut norm = q.map(|c| c.lift_to(field));
    for g in field.generators() {
        let cs = norm
            .coeffs()
            .iter()
            .map(|c| c.conjugate(&g.symbol))
            .collect::<Result<Vec<_>, _>>()
            .ok()?;
        norm = norm.mul(&Poly::new(cs));
    }
    let rational: Vec<_> = norm.coeffs().iter().map(TowerElement::as_rational).collect::<Option<_>>()?;
    let norm = Poly::new(rational).map(TowerElement::from_rational);
    let mut roots: Vec<TowerElement> = Vec::new();
    for (s, _) in norm.squarefree_decomposition() {
        for r in split_squarefree(&s, field).ok()? {
            if q.eval(&r).is_zero() && !roots.contains(&r) {
                roots.push(r);
            }
        }
    }
    (roots.len() == q.degree().unwrap_or(0)).then_some(roots)
}

/// Roots of `g` with multiplicities, sorted; fails naming a factor that does not split.
pub fn tower_roots(
    g: &Poly<TowerElement>,
    field: &TowerField,
) -> Result<Vec<(TowerElement, u32)>, DivisorError> {
    let mut out = Vec::new();
    for (s, e) in g.squarefree_decomposition() {
        let roots = split_squarefree(&s, field)
            .map_err(|bad| DivisorError::RootsNotInTower(format_tower_poly(&bad)))?;
        out.extend(roots.into_iter().map(|r| (r.lift_to(field), e)));
    }
    out.sort();
    Ok(out)
}

fn require_sextic(model: &HyperellipticModel) -> Result<(), DivisorError> {
    match model.degree() {
        6 => Ok(()),
        d => Err(DivisorError::UnsupportedDegree(d)),
    }
}

/// `div(g(z))`.
pub fn divisor_of_zpoly(
    g: &Poly<TowerElement>,
    model: &HyperellipticModel,
) -> Result<Divisor, DivisorError> {
    require_sextic(model)?;
    if g.is_zero() {
        return Err(DivisorError::ZeroFunction);
    }
    let field = model.base();
    let f = model.f_tower();
    let df = f.derivative();
    let mut d = Divisor::zero();
    for (r, e) in tower_roots(g, field)? {
        let fr = f.eval(&r);
        let e = e as i64;
        if fr.is_zero() {
            if df.eval(&r).is_zero() {
                return Err(DivisorError::SingularModel(r.to_string()));
            }
            d.add_point(CurvePoint::weierstrass(r), 2 * e);
        } else {
            let y = express_root(field, &fr).ok_or_else(|| DivisorError::OrdinateNotInTower(r.to_string()))?;
            d.add_point(CurvePoint::affine(r.clone(), y.neg()), e);
            d.add_point(CurvePoint::affine(r, y), e);
        }
    }
    let deg = g.degree().unwrap_or(0) as i64;
    Ok(d.sub(&Divisor::canonical().scale(deg)))
}

/// `div(y) = Σ (r, 0) - 3𝒦` over the six roots of `f`.
pub fn divisor_of_y(model: &HyperellipticModel) -> Result<Divisor, DivisorError> {
    require_sextic(model)?;
    let roots = tower_roots(&model.f_tower(), model.base())?;
    let mut d = Divisor::zero();
    for (r, e) in roots {
        if e > 1 {
            return Err(DivisorError::SingularModel(r.to_string()));
        }
        d.add_point(CurvePoint::weierstrass(r), 1);
    }
    Ok(d.sub(&Divisor::canonical().scale(3)))
}

/// `div(y^m · g / h)`; always of degree 0.
pub fn divisor_of_function(
    m: i64,
    g: &Poly<TowerElement>,
    h: &Poly<TowerElement>,
    model: &HyperellipticModel,
) -> Result<Divisor, DivisorError> {
    let dy = if m == 0 {
        require_sextic(model)?;
        Divisor::zero()
    } else {
        divisor_of_y(model)?.scale(m)
    };
    let d = dy
        .add(&divisor_of_zpoly(g, model)?)
        .sub(&divisor_of_zpoly(h, model)?);
    match d.degree() {
        0 => Ok(d),
        n => Err(DivisorError::NonzeroDegree(n)),
    }
}

/// Applies the automorphism negating generator `symbol` to every support point.
/// The points at infinity are swapped exactly when the distinguished `√lc(f)`
/// is negated; without such a root in the tower they are left in place.
pub fn conjugate_divisor(
    d: &Divisor,
    symbol: &str,
    model: &HyperellipticModel,
) -> Result<Divisor, DivisorError> {
    let swap = match model.sqrt_leading() {
        Some(s) => s.conjugate(symbol)? == s.neg() && !s.is_zero(),
        None => false,
    };
    let mut out = Divisor::zero();
    for (p, n) in d.terms() {
        let q = match p {
            CurvePoint::Affine { z, y } => {
                let z = z.lift_to(model.base()).conjugate(symbol)?;
                let y = y.lift_to(model.base()).conjugate(symbol)?;
                CurvePoint::affine(z, y)
            }
            CurvePoint::InfinityPlus if swap => CurvePoint::InfinityMinus,
            CurvePoint::InfinityMinus if swap => CurvePoint::InfinityPlus,
            other => other.clone(),
        };
        out.add_point(q, n);
    }
    Ok(out)
}

/// `y^m · g(z) / h(z)` with coefficients in the tower.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub m: i64,
    pub g: Poly<TowerElement>,
    pub h: Poly<TowerElement>,
}

impl FunctionSpec {
    /// `y / ∏ (z - rᵢ)`
    pub fn y_over_product(roots: &[TowerElement]) -> Self {
        let linear: Vec<Poly<TowerElement>> = roots.iter().map(Poly::linear).collect();
        FunctionSpec {
            m: 1,
            g: Poly::one(),
            h: Poly::product(&linear),
        }
    }

    pub fn to_json(&self) -> Value {
        let coeffs = |p: &Poly<TowerElement>| Value::Array(p.coeffs().iter().map(|c| c.to_json()).collect());
        serde_json::json!({ "m": self.m, "g": coeffs(&self.g), "h": coeffs(&self.h) })
    }

    pub fn from_json(field: &TowerField, v: &Value) -> Result<Self, DivisorError> {
        let bad = || DivisorError::Malformed(v.to_string());
        let poly = |key: &str| -> Result<Poly<TowerElement>, DivisorError> {
            let arr = v.get(key).and_then(Value::as_array).ok_or_else(bad)?;
            let cs = arr
                .iter()
                .map(|c| field.element_from_json(c))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Poly::new(cs))
        };
        Ok(FunctionSpec {
            m: v.get("m").and_then(Value::as_i64).ok_or_else(bad)?,
            g: poly("g")?,
            h: poly("h")?,
        })
    }
}

/// Outcome of comparing `div(φ)` against `σD - D`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Divisor,
    pub rhs: Divisor,
    pub holds: bool,
}

/// Checks `div(φ) = σD - D` for `D = Σ (rᵢ, 0)`.
pub fn check_identity(
    model: &HyperellipticModel,
    sigma: &str,
    d_roots: &[TowerElement],
    phi: &FunctionSpec,
) -> Result<IdentityCheck, DivisorError> {
    let d = weierstrass_divisor(model, d_roots)?;
    let lhs = divisor_of_function(phi.m, &phi.g, &phi.h, model)?;
    let rhs = conjugate_divisor(&d, sigma, model)?.sub(&d);
    let holds = lhs == rhs;
    Ok(IdentityCheck { lhs, rhs, holds })
}

/// `Σ (rᵢ, 0)`, each `rᵢ` checked to be a root of `f`.
pub fn weierstrass_divisor(model: &HyperellipticModel, roots: &[TowerElement]) -> Result<Divisor, DivisorError> {
    let zero = TowerElement::from_int(0);
    let mut d = Divisor::zero();
    for r in roots {
        if !model.contains_tower(r, &zero) {
            return Err(DivisorError::NotOnCurve(r.to_string(), "0".into()));
        }
        d.add_point(CurvePoint::weierstrass(r.lift_to(model.base())), 1);
    }
    Ok(d)
}

/// The identity `div(y / ∏(z - rᵢ)) = σD - D` for `D = Σ (rᵢ, 0)`.
pub fn verify_case3_identity(
    model: &HyperellipticModel,
    sigma: &str,
    d_roots: &[TowerElement],
) -> Result<IdentityCheck, DivisorError> {
    check_identity(model, sigma, d_roots, &FunctionSpec::y_over_product(d_roots))
}
