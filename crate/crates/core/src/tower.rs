//! Exact arithmetic in towers of quadratic extensions of ℚ.
//!
//! A tower `ℚ(g₁)(g₂)…(g_k)` with `g_i² ∈ ℚ(g₁,…,g_{i-1})` is represented on
//! the multilinear basis `∏_{i∈S} g_i`, `S ⊆ {1..k}`: coordinate `n` belongs
//! to the monomial whose generator set is the binary expansion of `n`.
//! Elements of a tower combine with elements of any of its sub-towers (the
//! prefixes of its generator list), so rational constants mix freely with
//! tower elements.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::arith::{exact_sqrt, format_rational, parse_rational, Rational};
use crate::poly::FieldElem;

pub const MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TowerError {
    #[error("degenerate extension: {square} is already a square, of {witness}")]
    DegenerateExtension { square: String, witness: TowerElement },
    #[error("cannot adjoin the square root of zero")]
    ZeroRadicand,
    #[error("tower depth is capped at {MAX_DEPTH}")]
    TooDeep,
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("negating {generator} does not fix the square of {later}, so it is not an automorphism")]
    NotAnAutomorphism { generator: String, later: String },
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("malformed element encoding: {0}")]
    Malformed(String),
    #[error("element does not belong to this tower")]
    ForeignElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub symbol: String,
    /// Coordinates of `symbol²` in the tower below this generator.
    square: Vec<Rational>,
}

#[derive(Debug, PartialEq)]
struct FieldInner {
    gens: Vec<Generator>,
}

/// An iterated quadratic extension of ℚ of depth at most [`MAX_DEPTH`].
#[derive(Clone)]
pub struct TowerField {
    inner: Arc<FieldInner>,
}

impl PartialEq for TowerField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl fmt::Debug for TowerField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for TowerField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q")?;
        for (i, g) in self.inner.gens.iter().enumerate() {
            let below = TowerField::from_gens(self.inner.gens[..i].to_vec());
            let sq = TowerElement::from_coords(&below, g.square.clone());
            write!(f, "({} = sqrt({}))", g.symbol, sq)?;
        }
        Ok(())
    }
}

impl TowerField {
    fn from_gens(gens: Vec<Generator>) -> Self {
        TowerField {
            inner: Arc::new(FieldInner { gens }),
        }
    }

    pub fn rationals() -> Self {
        Self::from_gens(Vec::new())
    }

    pub fn depth(&self) -> usize {
        self.inner.gens.len()
    }

    pub fn degree(&self) -> usize {
        1 << self.depth()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.inner.gens
    }

    pub fn generator_index(&self, symbol: &str) -> Option<usize> {
        self.inner.gens.iter().position(|g| g.symbol == symbol)
    }

    /// The generator itself as an element.
    pub fn gen(&self, symbol: &str) -> Result<TowerElement, TowerError> {
        let i = self
            .generator_index(symbol)
            .ok_or_else(|| TowerError::UnknownGenerator(symbol.to_string()))?;
        let mut coords = vec![Rational::zero(); self.degree()];
        coords[1 << i] = Rational::one();
        Ok(TowerElement::from_coords(self, coords))
    }

    /// `g²` for the named generator.
    pub fn generator_square(&self, symbol: &str) -> Result<TowerElement, TowerError> {
        let i = self
            .generator_index(symbol)
            .ok_or_else(|| TowerError::UnknownGenerator(symbol.to_string()))?;
        let below = self.prefix(i);
        Ok(TowerElement::from_coords(&below, self.inner.gens[i].square.clone()).lift_to(self))
    }

    /// The sub-tower generated by the first `depth` generators.
    pub fn prefix(&self, depth: usize) -> TowerField {
        if depth == self.depth() {
            return self.clone();
        }
        Self::from_gens(self.inner.gens[..depth].to_vec())
    }

    /// Whether `self` is a sub-tower (prefix) of `other`.
    pub fn is_prefix_of(&self, other: &TowerField) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.depth() <= other.depth()
                && self.inner.gens[..] == other.inner.gens[..self.depth()])
    }

    pub fn element(&self, q: &Rational) -> TowerElement {
        TowerElement::from_rational(q).lift_to(self)
    }

    /// `F(√d)` with a fresh generator named `symbol`. Fails when `d` already
    /// has a square root in `F`, returning that root.
    pub fn extend(&self, symbol: &str, d: &TowerElement) -> Result<TowerField, TowerError> {
        if !d.field.is_prefix_of(self) {
            return Err(TowerError::ForeignElement);
        }
        if self.depth() >= MAX_DEPTH {
            return Err(TowerError::TooDeep);
        }
        if self.generator_index(symbol).is_some() {
            return Err(TowerError::Malformed(format!("duplicate generator {symbol}")));
        }
        if d.is_zero() {
            return Err(TowerError::ZeroRadicand);
        }
        let d = d.lift_to(self);
        if let Some(w) = express_root(self, &d) {
            return Err(TowerError::DegenerateExtension {
                square: d.to_string(),
                witness: w,
            });
        }
        let mut gens = self.inner.gens.clone();
        gens.push(Generator {
            symbol: symbol.to_string(),
            square: d.coords,
        });
        Ok(Self::from_gens(gens))
    }

    /// The field with the larger generator list, when one is a prefix of the other.
    fn common(&self, other: &TowerField) -> TowerField {
        if self.is_prefix_of(other) {
            other.clone()
        } else if other.is_prefix_of(self) {
            self.clone()
        } else {
            panic!("elements from unrelated towers: {self} and {other}")
        }
    }

    pub fn describe(&self) -> TowerDescription {
        TowerDescription {
            generators: self
                .inner
                .gens
                .iter()
                .map(|g| GeneratorDescription {
                    symbol: g.symbol.clone(),
                    square: coords_to_json(&g.square),
                })
                .collect(),
        }
    }

    /// Rebuilds a tower from its description, re-running every nonsquare check.
    pub fn from_description(desc: &TowerDescription) -> Result<Self, TowerError> {
        let mut f = TowerField::rationals();
        for g in &desc.generators {
            let sq = f.element_from_json(&g.square)?;
            f = f.extend(&g.symbol, &sq)?;
        }
        Ok(f)
    }

    pub fn element_from_json(&self, v: &Value) -> Result<TowerElement, TowerError> {
        let coords = coords_from_json(v)?;
        if !coords.len().is_power_of_two() || coords.len() > self.degree() {
            return Err(TowerError::Malformed(v.to_string()));
        }
        let depth = coords.len().trailing_zeros() as usize;
        Ok(TowerElement::from_coords(&self.prefix(depth), coords).lift_to(self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDescription {
    pub symbol: String,
    pub square: Value,
}

/// Serializable form of a tower: generators in order with their squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerDescription {
    pub generators: Vec<GeneratorDescription>,
}

/// An element of a [`TowerField`].
#[derive(Clone)]
pub struct TowerElement {
    field: TowerField,
    coords: Vec<Rational>,
}

impl TowerElement {
    fn from_coords(field: &TowerField, coords: Vec<Rational>) -> Self {
        debug_assert_eq!(coords.len(), field.degree());
        TowerElement {
            field: field.clone(),
            coords,
        }
    }

    pub fn from_rational(q: &Rational) -> Self {
        Self::from_coords(&TowerField::rationals(), vec![q.clone()])
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }

    pub fn field(&self) -> &TowerField {
        &self.field
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// The rational value, if the element lies in ℚ.
    pub fn as_rational(&self) -> Option<Rational> {
        self.coords[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coords[0].clone())
    }

    /// Embeds into an extension tower.
    pub fn lift_to(&self, field: &TowerField) -> TowerElement {
        assert!(
            self.field.is_prefix_of(field),
            "{} is not a sub-tower of {}",
            self.field,
            field
        );
        if self.field.depth() == field.depth() {
            return TowerElement::from_coords(field, self.coords.clone());
        }
        let mut coords = self.coords.clone();
        coords.resize(field.degree(), Rational::zero());
        TowerElement::from_coords(field, coords)
    }

    fn pair(&self, other: &TowerElement) -> (TowerField, Vec<Rational>, Vec<Rational>) {
        let f = self.field.common(&other.field);
        let a = self.lift_to(&f).coords;
        let b = other.lift_to(&f).coords;
        (f, a, b)
    }

    pub fn try_inv(&self) -> Result<TowerElement, TowerError> {
        if self.is_zero() {
            return Err(TowerError::InverseOfZero);
        }
        Ok(TowerElement::from_coords(
            &self.field,
            inv_coords(&self.field.inner.gens, &self.coords),
        ))
    }

    /// Applies the automorphism `g ↦ -g` that fixes every other generator.
    pub fn conjugate(&self, symbol: &str) -> Result<TowerElement, TowerError> {
        let j = self
            .field
            .generator_index(symbol)
            .ok_or_else(|| TowerError::UnknownGenerator(symbol.to_string()))?;
        check_automorphism(&self.field, j)?;
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(n, c)| if n >> j & 1 == 1 { -c } else { c.clone() })
            .collect();
        Ok(TowerElement::from_coords(&self.field, coords))
    }

    pub fn pow(&self, e: u32) -> TowerElement {
        (0..e).fold(TowerElement::from_int(1), |acc, _| acc.mul(self))
    }

    pub fn to_json(&self) -> Value {
        coords_to_json(&self.coords)
    }

    fn key(&self, field: &TowerField) -> Vec<Rational> {
        self.lift_to(field).coords
    }
}

/// Rejects conjugation by generator `j` when a later generator's square
/// involves `g_j`.
fn check_automorphism(field: &TowerField, j: usize) -> Result<(), TowerError> {
    let gens = &field.inner.gens;
    for later in &gens[j + 1..] {
        let moved = later
            .square
            .iter()
            .enumerate()
            .any(|(n, c)| n >> j & 1 == 1 && !c.is_zero());
        if moved {
            return Err(TowerError::NotAnAutomorphism {
                generator: gens[j].symbol.clone(),
                later: later.symbol.clone(),
            });
        }
    }
    Ok(())
}

fn add_coords(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub_coords(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mul_coords(gens: &[Generator], a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let Some((top, below)) = gens.split_last() else {
        return vec![&a[0] * &b[0]];
    };
    let h = a.len() / 2;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let a0b0 = mul_coords(below, a0, b0);
    let a1b1 = mul_coords(below, a1, b1);
    let low = add_coords(&a0b0, &mul_coords(below, &a1b1, &top.square));
    let high = add_coords(&mul_coords(below, a0, b1), &mul_coords(below, a1, b0));
    [low, high].concat()
}

/// `(a₀ + a₁g)⁻¹ = (a₀ - a₁g) / (a₀² - a₁²g²)`, recursing on the norm.
fn inv_coords(gens: &[Generator], a: &[Rational]) -> Vec<Rational> {
    let Some((top, below)) = gens.split_last() else {
        return vec![a[0].recip()];
    };
    let h = a.len() / 2;
    let (a0, a1) = a.split_at(h);
    let a1sq = mul_coords(below, a1, a1);
    let norm = sub_coords(
        &mul_coords(below, a0, a0),
        &mul_coords(below, &a1sq, &top.square),
    );
    let ninv = inv_coords(below, &norm);
    let low = mul_coords(below, a0, &ninv);
    let high: Vec<Rational> = mul_coords(below, a1, &ninv).iter().map(|c| -c).collect();
    [low, high].concat()
}

fn is_zero_coords(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// A square root of `t`, solving `(c + dg)² = a + bg` level by level.
fn sqrt_coords(gens: &[Generator], t: &[Rational]) -> Option<Vec<Rational>> {
    let Some((top, below)) = gens.split_last() else {
        return exact_sqrt(&t[0]).map(|r| vec![r]);
    };
    let h = t.len() / 2;
    let (a, b) = t.split_at(h);
    let zeros = vec![Rational::zero(); h];
    if is_zero_coords(b) {
        if let Some(c) = sqrt_coords(below, a) {
            return Some([c, zeros].concat());
        }
        let a_over_s = mul_coords(below, a, &inv_coords(below, &top.square));
        let d = sqrt_coords(below, &a_over_s)?;
        return Some([zeros, d].concat());
    }
    // c² + d²s = a, 2cd = b, hence (c² - d²s)² = a² - b²s.
    let norm = sub_coords(
        &mul_coords(below, a, a),
        &mul_coords(below, &mul_coords(below, b, b), &top.square),
    );
    let n = sqrt_coords(below, &norm)?;
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    for n in [n.clone(), n.iter().map(|x| -x).collect::<Vec<_>>()] {
        let c2: Vec<Rational> = add_coords(a, &n).iter().map(|x| x * &half).collect();
        if is_zero_coords(&c2) {
            continue;
        }
        if let Some(c) = sqrt_coords(below, &c2) {
            let two_c: Vec<Rational> = c.iter().map(|x| x * BigInt::from(2)).collect();
            let d = mul_coords(below, b, &inv_coords(below, &two_c));
            return Some([c, d].concat());
        }
    }
    None
}

/// A `y ∈ F` with `y² = target`, if one exists.
pub fn express_root(field: &TowerField, target: &TowerElement) -> Option<TowerElement> {
    let t = target.lift_to(field);
    let r = sqrt_coords(&field.inner.gens, &t.coords)?;
    let y = TowerElement::from_coords(field, r);
    debug_assert!(y.mul(&y) == t);
    Some(y)
}

fn coords_to_json(c: &[Rational]) -> Value {
    if c.len() == 1 {
        return Value::String(format_rational(&c[0]));
    }
    let (lo, hi) = c.split_at(c.len() / 2);
    Value::Array(vec![coords_to_json(lo), coords_to_json(hi)])
}

fn coords_from_json(v: &Value) -> Result<Vec<Rational>, TowerError> {
    match v {
        Value::String(s) => parse_rational(s)
            .map(|q| vec![q])
            .map_err(|e| TowerError::Malformed(e.to_string())),
        Value::Array(parts) if parts.len() == 2 => {
            let lo = coords_from_json(&parts[0])?;
            let hi = coords_from_json(&parts[1])?;
            if lo.len() != hi.len() {
                return Err(TowerError::Malformed(v.to_string()));
            }
            Ok([lo, hi].concat())
        }
        _ => Err(TowerError::Malformed(v.to_string())),
    }
}

impl PartialEq for TowerElement {
    fn eq(&self, other: &Self) -> bool {
        let f = if self.field.is_prefix_of(&other.field) {
            &other.field
        } else if other.field.is_prefix_of(&self.field) {
            &self.field
        } else {
            return false;
        };
        self.key(f) == other.key(f)
    }
}

impl Eq for TowerElement {}

impl PartialOrd for TowerElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on coordinates in the common tower. Only meaningful as a
/// canonical ordering (for sorted containers); it is not a field ordering.
impl Ord for TowerElement {
    fn cmp(&self, other: &Self) -> Ordering {
        let f = self.field.common(&other.field);
        self.key(&f).cmp(&other.key(&f))
    }
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens = &self.field.inner.gens;
        let mut first = true;
        for (n, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let monomial: Vec<&str> = (0..gens.len())
                .filter(|j| n >> j & 1 == 1)
                .map(|j| gens[j].symbol.as_str())
                .collect();
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mag = c.abs();
            if monomial.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", monomial.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&mag), monomial.join("*"))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FieldElem for TowerElement {
    fn zero_elem() -> Self {
        TowerElement::from_int(0)
    }
    fn one_elem() -> Self {
        TowerElement::from_int(1)
    }
    fn is_zero_elem(&self) -> bool {
        TowerElement::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        let (f, a, b) = self.pair(other);
        TowerElement::from_coords(&f, add_coords(&a, &b))
    }
    fn sub(&self, other: &Self) -> Self {
        let (f, a, b) = self.pair(other);
        TowerElement::from_coords(&f, sub_coords(&a, &b))
    }
    fn mul(&self, other: &Self) -> Self {
        let (f, a, b) = self.pair(other);
        let c = mul_coords(&f.inner.gens, &a, &b);
        TowerElement::from_coords(&f, c)
    }
    fn neg(&self) -> Self {
        TowerElement::from_coords(&self.field, self.coords.iter().map(|c| -c).collect())
    }
    fn inv(&self) -> Option<Self> {
        self.try_inv().ok()
    }
    fn from_rational(q: &Rational) -> Self {
        TowerElement::from_rational(q)
    }
}
