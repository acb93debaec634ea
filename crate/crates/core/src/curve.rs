//! Elliptic models `y² = x(x-b)(x-c)` and hyperelliptic models `y² = f(z)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    format_rational, legendre, squarefree_part, unit_class, val, ArithError, IntMod, Prime, Rational,
};
use crate::poly::Poly;
use crate::tower::{express_root, TowerDescription, TowerElement, TowerError, TowerField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("0, b = {b} and c = {c} must be pairwise distinct")]
    DegenerateElliptic { b: BigInt, c: BigInt },
    #[error("singular model: repeated factor {0}")]
    SingularModel(String),
    #[error("zero polynomial is not a curve")]
    ZeroPolynomial,
    #[error("({x}, {y}) is not on the curve")]
    NotOnCurve { x: String, y: String },
    #[error("pairing undefined at kernel points O and T = (0,0); the substitute value at T is not implemented")]
    KernelPoint,
    #[error("model is not {p}-integral after scaling by {p}^{scaling}")]
    NotIntegral { p: u64, scaling: u32 },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// `E: y² = x(x - b)(x - c)` with integral `b, c` and `0, b, c` distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EllipticRecord", into = "EllipticRecord")]
pub struct EllipticModel {
    b: BigInt,
    c: BigInt,
}

#[derive(Serialize, Deserialize)]
struct EllipticRecord {
    #[serde(with = "crate::serde_str")]
    b: BigInt,
    #[serde(with = "crate::serde_str")]
    c: BigInt,
}

impl TryFrom<EllipticRecord> for EllipticModel {
    type Error = CurveError;
    fn try_from(r: EllipticRecord) -> Result<Self, CurveError> {
        EllipticModel::new(r.b, r.c)
    }
}

impl From<EllipticModel> for EllipticRecord {
    fn from(e: EllipticModel) -> Self {
        EllipticRecord { b: e.b, c: e.c }
    }
}

/// A point of `E(ℚ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EllipticPoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl EllipticModel {
    pub fn new(b: impl Into<BigInt>, c: impl Into<BigInt>) -> Result<Self, CurveError> {
        let (b, c) = (b.into(), c.into());
        if b.is_zero() || c.is_zero() || b == c {
            return Err(CurveError::DegenerateElliptic { b, c });
        }
        Ok(EllipticModel { b, c })
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// `16·b²·c²·(b-c)²`
    pub fn discriminant(&self) -> BigInt {
        let d = &self.b * &self.c * (&self.b - &self.c);
        &d * &d * 16
    }

    /// `x(x - b)(x - c)`
    pub fn rhs(&self, x: &Rational) -> Rational {
        let b = Rational::from_integer(self.b.clone());
        let c = Rational::from_integer(self.c.clone());
        x * (x - b) * (x - c)
    }

    pub fn cubic(&self) -> Poly<Rational> {
        let b = Rational::from_integer(self.b.clone());
        let c = Rational::from_integer(self.c.clone());
        Poly::new(vec![Rational::zero(), &b * &c, -(&b + &c), Rational::one()])
    }

    pub fn point(&self, x: Rational, y: Rational) -> Result<EllipticPoint, CurveError> {
        if &y * &y != self.rhs(&x) {
            return Err(CurveError::NotOnCurve {
                x: format_rational(&x),
                y: format_rational(&y),
            });
        }
        Ok(EllipticPoint::Affine { x, y })
    }

    /// The 2-torsion point `T = (0, 0)` generating the kernel of the 2-isogeny.
    pub fn t(&self) -> EllipticPoint {
        EllipticPoint::Affine {
            x: Rational::zero(),
            y: Rational::zero(),
        }
    }

    pub fn neg(&self, p: &EllipticPoint) -> EllipticPoint {
        match p {
            EllipticPoint::Infinity => EllipticPoint::Infinity,
            EllipticPoint::Affine { x, y } => EllipticPoint::Affine {
                x: x.clone(),
                y: -y,
            },
        }
    }

    /// Chord-tangent addition.
    pub fn add(&self, p: &EllipticPoint, q: &EllipticPoint) -> EllipticPoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (EllipticPoint::Infinity, _) => return q.clone(),
            (_, EllipticPoint::Infinity) => return p.clone(),
            (EllipticPoint::Affine { x: x1, y: y1 }, EllipticPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let a2 = -Rational::from_integer(&self.b + &self.c);
        let a4 = Rational::from_integer(&self.b * &self.c);
        let slope = if x1 == x2 {
            if y1 + y2 == Rational::zero() {
                return EllipticPoint::Infinity;
            }
            let three = Rational::from_integer(BigInt::from(3));
            let two = Rational::from_integer(BigInt::from(2));
            (three * x1 * x1 + two.clone() * &a2 * x1 + a4) / (two * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &slope * &slope - a2 - x1 - x2;
        let y3 = -(y1 + &slope * (&x3 - x1));
        EllipticPoint::Affine { x: x3, y: y3 }
    }
}

impl fmt::Display for EllipticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x(x - ({}))(x - ({}))", self.b, self.c)
    }
}

/// The 2-isogeny descent pairing `(P, T) ↦ x(P) mod ℚ*²`, as the signed
/// squarefree integer in the square class of `x(P)`.
pub fn descent_pairing_value(e: &EllipticModel, p: &EllipticPoint) -> Result<BigInt, CurveError> {
    match p {
        EllipticPoint::Infinity => Err(CurveError::KernelPoint),
        EllipticPoint::Affine { x, y } => {
            if y * y != e.rhs(x) {
                return Err(CurveError::NotOnCurve {
                    x: format_rational(x),
                    y: format_rational(y),
                });
            }
            if x.is_zero() {
                return Err(CurveError::KernelPoint);
            }
            Ok(squarefree_part(x)?)
        }
    }
}

/// Square class in `ℚ_p*/ℚ_p*²` for odd `p`: the valuation parity and the
/// residue symbol of the unit part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalSquareClass {
    pub odd_valuation: bool,
    pub unit_residue: i8,
}

/// The local descent pairing value of `x` in `ℚ_p*/ℚ_p*²`, `p` odd.
pub fn local_pairing_class(x: &Rational, p: Prime) -> Result<LocalSquareClass, CurveError> {
    if x.is_zero() {
        return Err(ArithError::ValuationOfZero.into());
    }
    let (v, u) = unit_class(x, p.get());
    Ok(LocalSquareClass {
        odd_valuation: v.is_odd(),
        unit_residue: legendre(&u, p)?,
    })
}

/// `y² = f(z)` with `f ∈ ℚ[z]`, considered over a tower field (ℚ by default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct HyperellipticModel {
    f: Poly<Rational>,
    base: TowerField,
}

/// Serialized form: the base field followed by the coefficients of `f`,
/// constant term first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub field: TowerDescription,
    #[serde(with = "crate::serde_str::rat_vec")]
    pub coefficients: Vec<Rational>,
}

impl TryFrom<ModelRecord> for HyperellipticModel {
    type Error = CurveError;
    fn try_from(r: ModelRecord) -> Result<Self, CurveError> {
        let base = TowerField::from_description(&r.field)?;
        let f = Poly::new(r.coefficients);
        if f.is_zero() {
            return Err(CurveError::ZeroPolynomial);
        }
        Ok(HyperellipticModel { f, base })
    }
}

impl From<HyperellipticModel> for ModelRecord {
    fn from(h: HyperellipticModel) -> Self {
        ModelRecord {
            field: h.base.describe(),
            coefficients: h.f.coeffs().to_vec(),
        }
    }
}

/// Reduction of a model modulo a prime after the scaling `y ↦ y/p^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub p: u64,
    pub scaling: u32,
    /// Coefficients of `p^{2k} f` mod p, constant term first, untrimmed.
    pub coeffs: Vec<u64>,
    pub reduced: bool,
}

impl HyperellipticModel {
    pub fn new(f: Poly<Rational>) -> Result<Self, CurveError> {
        if f.is_zero() {
            return Err(CurveError::ZeroPolynomial);
        }
        Ok(HyperellipticModel {
            f,
            base: TowerField::rationals(),
        })
    }

    /// The same curve, regarded over a larger field.
    pub fn base_extend(&self, field: &TowerField) -> Self {
        HyperellipticModel {
            f: self.f.clone(),
            base: field.clone(),
        }
    }

    pub fn f(&self) -> &Poly<Rational> {
        &self.f
    }

    pub fn base(&self) -> &TowerField {
        &self.base
    }

    pub fn degree(&self) -> usize {
        self.f.degree().expect("nonzero model")
    }

    pub fn leading(&self) -> Rational {
        self.f.leading()
    }

    /// `f` with coefficients embedded in the base tower.
    pub fn f_tower(&self) -> Poly<TowerElement> {
        self.f.map(|c| self.base.element(c))
    }

    /// Distinguished `√lc(f)` in the base tower, labelling the two points at infinity.
    pub fn sqrt_leading(&self) -> Option<TowerElement> {
        express_root(&self.base, &self.base.element(&self.leading()))
    }

    pub fn contains(&self, z: &Rational, y: &Rational) -> bool {
        y * y == self.f.eval(z)
    }

    pub fn contains_tower(&self, z: &TowerElement, y: &TowerElement) -> bool {
        use crate::poly::FieldElem;
        y.mul(y) == self.f_tower().eval(z)
    }

    /// Least `k ≥ 0` with `p^{2k} f` p-integral.
    pub fn minimal_scaling(&self, p: u64) -> u32 {
        let min_v = self
            .f
            .coeffs()
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| val(c, p).expect("nonzero"))
            .min()
            .unwrap_or(0);
        if min_v >= 0 {
            0
        } else {
            ((-min_v + 1) / 2) as u32
        }
    }

    pub fn to_record(&self) -> ModelRecord {
        self.clone().into()
    }
}

impl fmt::Display for HyperellipticModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = {}", self.f)?;
        if self.base.depth() > 0 {
            write!(f, " over {}", self.base)?;
        }
        Ok(())
    }
}

/// Genus `⌊(deg f - 1)/2⌋` of a smooth model; rejects `f` with a repeated factor.
pub fn genus_of_model(h: &HyperellipticModel) -> Result<u32, CurveError> {
    let g = h.f.gcd(&h.f.derivative());
    if g.degree().unwrap_or(0) > 0 {
        return Err(CurveError::SingularModel(g.to_string()));
    }
    Ok((h.degree().saturating_sub(1) / 2) as u32)
}

/// Reduces `p^{2k} f` modulo `p` for the declared scaling `k`.
pub fn reduce_mod_p(h: &HyperellipticModel, p: Prime, scaling: u32) -> Result<Reduction, CurveError> {
    let pb = p.big();
    let factor = Rational::from_integer(num_traits::pow(pb.clone(), 2 * scaling as usize));
    let m = IntMod::new(pb);
    let mut coeffs = Vec::with_capacity(h.f.coeffs().len());
    for c in h.f.coeffs() {
        let scaled = c * &factor;
        let r = m.reduce(&scaled).ok_or(CurveError::NotIntegral {
            p: p.get(),
            scaling,
        })?;
        coeffs.push(r.to_u64().expect("residue below p"));
    }
    let reduced = coeffs.iter().any(|&c| c != 0);
    Ok(Reduction {
        p: p.get(),
        scaling,
        coeffs,
        reduced,
    })
}

/// Brute-force search for rational points `P ∈ E(ℚ)` with integral `x`, `|x| ≤ bound`.
pub fn small_integral_points(e: &EllipticModel, bound: i64) -> Vec<EllipticPoint> {
    let mut out = Vec::new();
    for x in -bound..=bound {
        let xr = Rational::from_integer(BigInt::from(x));
        let r = e.rhs(&xr);
        if r.is_negative() {
            continue;
        }
        let n = r.to_integer();
        let s = n.sqrt();
        if &s * &s == n {
            out.push(EllipticPoint::Affine {
                x: xr.clone(),
                y: Rational::from_integer(s.clone()),
            });
            if !s.is_zero() {
                out.push(EllipticPoint::Affine {
                    x: xr,
                    y: Rational::from_integer(-s),
                });
            }
        }
    }
    out
}
