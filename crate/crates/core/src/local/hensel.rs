use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::LocalError;
use crate::arith::{inv_mod, IntMod, Prime, Rational};
use crate::poly::Poly;

/// A point of `y² = f(z)` over `ℤ/p^kℤ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalPoint {
    pub p: Prime,
    pub precision: u32,
    #[serde(with = "crate::serde_str")]
    pub z: BigInt,
    #[serde(with = "crate::serde_str")]
    pub y: BigInt,
}

impl LocalPoint {
    /// Whether `y² ≡ f(z) (mod p^precision)`.
    pub fn satisfies(&self, f: &Poly<Rational>) -> bool {
        let m = IntMod::prime_power(self.p.get(), self.precision);
        match reduce_poly(f, &m) {
            Some(coeffs) => m.is_zero(&(&self.y * &self.y - eval(&coeffs, &self.z, &m))),
            None => false,
        }
    }
}

pub(crate) fn reduce_poly(f: &Poly<Rational>, m: &IntMod) -> Option<Vec<BigInt>> {
    f.coeffs().iter().map(|c| m.reduce(c)).collect()
}

pub(crate) fn eval(coeffs: &[BigInt], x: &BigInt, m: &IntMod) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| m.norm(&(acc * x + c)))
}

fn deriv(coeffs: &[BigInt]) -> Vec<BigInt> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i)
        .collect()
}

/// Lifts a smooth point of `y² = f(z)` modulo `p` to a point modulo `p^k`.
///
/// With `y₀` a unit the `y`-coordinate is refined with `z` fixed; with
/// `y₀ ≡ 0` and `f'(z₀)` a unit, `z` is refined with `y` fixed. At `p = 2`
/// an odd `y₀` must already satisfy the equation modulo 8.
pub fn hensel_lift(
    f: &Poly<Rational>,
    p: Prime,
    seed: (&BigInt, &BigInt),
    k: u32,
) -> Result<LocalPoint, LocalError> {
    let pp = p.get();
    let k = k.max(1);
    let m = IntMod::prime_power(pp, k);
    let coeffs = reduce_poly(f, &m).ok_or(LocalError::NotIntegral(pp))?;
    let dcoeffs = deriv(&coeffs);
    let pb = p.big();
    let modp = IntMod::new(pb.clone());
    let (z0, y0) = (m.norm(seed.0), m.norm(seed.1));
    if !modp.is_zero(&(&y0 * &y0 - eval(&coeffs, &z0, &modp))) {
        return Err(LocalError::SeedNotOnCurve);
    }
    let y_unit = !modp.is_zero(&y0);
    let fprime_unit = !modp.is_zero(&eval(&dcoeffs, &z0, &modp));

    if y_unit && pp != 2 {
        let a = eval(&coeffs, &z0, &m);
        let mut y = y0;
        for _ in 0..k {
            let err = m.norm(&(&y * &y - &a));
            if err.is_zero() {
                break;
            }
            let inv = inv_mod(&(&y * 2u32), &m.modulus).expect("2y is a unit");
            y = m.norm(&(&y - err * inv));
        }
        return finish(p, k, z0, y, &coeffs, &m);
    }
    if y_unit {
        // p = 2, y odd: y² ≡ a (mod 2^j), j ≥ 3, lifts by adding 2^{j-1} when needed.
        let a = eval(&coeffs, &z0, &m);
        let m8 = IntMod::new(BigInt::from(8));
        if !m8.is_zero(&(&y0 * &y0 - &a)) {
            return Err(LocalError::TwoAdicSeed);
        }
        let mut y = y0;
        for j in 3..k {
            let mj1 = IntMod::new(BigInt::one() << (j + 1));
            if !mj1.is_zero(&(&y * &y - &a)) {
                y = m.norm(&(y + (BigInt::one() << (j - 1))));
            }
        }
        return finish(p, k, z0, y, &coeffs, &m);
    }
    if fprime_unit {
        let target = m.norm(&(&y0 * &y0));
        let mut z = z0;
        for _ in 0..k {
            let g = m.norm(&(eval(&coeffs, &z, &m) - &target));
            if g.is_zero() {
                break;
            }
            let d = eval(&dcoeffs, &z, &m);
            let inv = inv_mod(&d, &m.modulus).expect("f'(z) is a unit");
            z = m.norm(&(&z - g * inv));
        }
        return finish(p, k, z, y0, &coeffs, &m);
    }
    Err(LocalError::NonSmoothSeed)
}

fn finish(
    p: Prime,
    k: u32,
    z: BigInt,
    y: BigInt,
    coeffs: &[BigInt],
    m: &IntMod,
) -> Result<LocalPoint, LocalError> {
    debug_assert!(m.is_zero(&(&y * &y - eval(coeffs, &z, m))));
    if !m.is_zero(&(&y * &y - eval(coeffs, &z, m))) {
        return Err(LocalError::LiftFailed);
    }
    Ok(LocalPoint {
        p,
        precision: k,
        z,
        y,
    })
}
