use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Rational;

pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut b = (base % m) as u128;
    let mut acc: u128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let e = a.extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Square root of `a` modulo an odd prime `p` (Tonelli–Shanks), or `None` for
/// a nonresidue. For `p = 2` every residue is its own square root.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if p == 2 || a == 0 {
        return Some(a);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulm(t2, t2);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mulm(b, b);
        }
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Square root of a unit `a` modulo `p^k` for odd `p`, by Newton iteration
/// from a root modulo `p`.
pub fn sqrt_mod_prime_power(a: &BigInt, p: u64, k: u32) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let a0 = a.mod_floor(&pb);
    let r0 = sqrt_mod_prime(u64::try_from(&a0).ok()?, p)?;
    if r0 == 0 || p == 2 {
        return None;
    }
    let modulus = pb.pow(k);
    let mut y = BigInt::from(r0);
    let mut prec = 1;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = BigInt::from(p).pow(prec);
        let two_y = (&y * 2u32).mod_floor(&m);
        let inv = inv_mod(&two_y, &m)?;
        y = (&y - (&y * &y - a) * inv).mod_floor(&m);
    }
    Some(y.mod_floor(&modulus))
}

/// Reduction of p-integral rationals into ℤ/nℤ.
#[derive(Debug, Clone)]
pub struct IntMod {
    pub modulus: BigInt,
}

impl IntMod {
    pub fn new(modulus: BigInt) -> Self {
        assert!(modulus.is_positive());
        IntMod { modulus }
    }

    pub fn prime_power(p: u64, k: u32) -> Self {
        Self::new(BigInt::from(p).pow(k))
    }

    /// `None` when the denominator is not invertible.
    pub fn reduce(&self, x: &Rational) -> Option<BigInt> {
        if x.denom().is_one() {
            return Some(x.numer().mod_floor(&self.modulus));
        }
        let inv = inv_mod(x.denom(), &self.modulus)?;
        Some((x.numer() * inv).mod_floor(&self.modulus))
    }

    pub fn norm(&self, x: &BigInt) -> BigInt {
        x.mod_floor(&self.modulus)
    }

    pub fn is_zero(&self, x: &BigInt) -> bool {
        self.norm(x).is_zero()
    }
}
