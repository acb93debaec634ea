//! Exact integer and rational arithmetic over ℚ: p-adic valuations, quadratic
//! residue symbols, local square tests and primes in arithmetic progressions.
//!
//! Rationals are `num_rational::BigRational`, which already keeps the
//! denominator positive and the fraction reduced.

mod modp;
mod prime;

pub use modp::{inv_mod, mod_pow, sqrt_mod_prime, sqrt_mod_prime_power, IntMod};
pub use prime::{
    factor_u64, is_prime_u64, prime_in_progression, primes_up_to, Modulus, Prime,
    DEFAULT_CEILING_FACTOR,
};

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("valuation of zero")]
    ValuationOfZero,
    #[error("{0} is not prime")]
    NotPrime(BigInt),
    #[error("the residue symbol needs an odd prime, got 2")]
    EvenPrime,
    #[error("residue {residue} is not coprime to modulus {modulus}")]
    NotCoprime { residue: BigInt, modulus: u64 },
    #[error("no prime = {residue} mod {modulus} below the search ceiling {ceiling}")]
    CeilingExceeded {
        residue: u64,
        modulus: u64,
        ceiling: u128,
    },
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
    #[error("{0} does not fit the machine-integer range used here")]
    Overflow(String),
}

/// A place of ℚ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum Place {
    Real,
    Finite(Prime),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "real"),
            Place::Finite(p) => write!(f, "finite({})", p),
        }
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"17"`, `"-3/4"` and similar into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let t = s.trim();
    let bad = || ArithError::Parse(s.to_string());
    match t.split_once('/') {
        None => BigInt::from_str(t).map(Rational::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Canonical string form: `n` or `n/d`.
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exponent of `p` in the nonzero integer `n`, and the cofactor.
pub fn split_int(n: &BigInt, p: u64) -> (i64, BigInt) {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

pub fn val_int(n: &BigInt, p: u64) -> Result<i64, ArithError> {
    if n.is_zero() {
        return Err(ArithError::ValuationOfZero);
    }
    Ok(split_int(n, p).0)
}

/// The p-adic valuation of a nonzero rational.
pub fn val(x: &Rational, p: u64) -> Result<i64, ArithError> {
    if x.is_zero() {
        return Err(ArithError::ValuationOfZero);
    }
    Ok(split_int(x.numer(), p).0 - split_int(x.denom(), p).0)
}

/// `x = p^v · u` with `u` a p-adic unit; returns `(v, numerator·denominator of u)`.
/// The second component has the same square class as `u` and is coprime to `p`.
pub fn unit_class(x: &Rational, p: u64) -> (i64, BigInt) {
    let (vn, un) = split_int(x.numer(), p);
    let (vd, ud) = split_int(x.denom(), p);
    (vn - vd, un * ud)
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: Prime) -> Result<i8, ArithError> {
    let p = p.get();
    if p == 2 {
        return Err(ArithError::EvenPrime);
    }
    let r = a.mod_floor(&BigInt::from(p)).to_u64().expect("reduced residue");
    if r == 0 {
        return Ok(0);
    }
    Ok(if mod_pow(r, (p - 1) / 2, p) == 1 { 1 } else { -1 })
}

/// Whether the nonzero rational `x` is a square in the completion ℚ_v.
pub fn is_square_local(x: &Rational, v: Place) -> Result<bool, ArithError> {
    if x.is_zero() {
        return Err(ArithError::ValuationOfZero);
    }
    match v {
        Place::Real => Ok(x.is_positive()),
        Place::Finite(p) => {
            let (v, u) = unit_class(x, p.get());
            if v.is_odd() {
                return Ok(false);
            }
            if p.get() == 2 {
                Ok(u.mod_floor(&BigInt::from(8)) == BigInt::one())
            } else {
                Ok(legendre(&u, p)? == 1)
            }
        }
    }
}

/// Square class of a nonzero rational over ℚ: the signed squarefree integer
/// `s` with `x / s ∈ ℚ*²`.
pub fn squarefree_part(x: &Rational) -> Result<BigInt, ArithError> {
    if x.is_zero() {
        return Err(ArithError::ValuationOfZero);
    }
    let n = x.numer() * x.denom();
    let mag = n
        .abs()
        .to_u64()
        .ok_or_else(|| ArithError::Overflow(n.to_string()))?;
    let mut s: u64 = 1;
    for (p, e) in factor_u64(mag) {
        if e % 2 == 1 {
            s *= p;
        }
    }
    let s = BigInt::from(s);
    Ok(if n.sign() == Sign::Minus { -s } else { s })
}

/// Integer square root test on nonnegative integers.
pub fn exact_sqrt_int(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

/// Square root in ℚ, if it exists (the nonnegative one).
pub fn exact_sqrt(x: &Rational) -> Option<Rational> {
    let n = exact_sqrt_int(x.numer())?;
    let d = exact_sqrt_int(x.denom())?;
    Some(Rational::new(n, d))
}
