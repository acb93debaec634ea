use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{mod_pow, ArithError};

/// Default search ceiling for [`prime_in_progression`] is this factor times the modulus.
pub const DEFAULT_CEILING_FACTOR: u128 = 1_000_000_000;

/// Strong-pseudoprime bases that make Miller–Rabin deterministic below 3.3·10²⁴.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// A certified prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(ArithError::NotPrime(BigInt::from(p)))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigInt {
        BigInt::from(self.0)
    }
}

impl TryFrom<String> for Prime {
    type Error = ArithError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        let p: u64 = s.parse().map_err(|_| ArithError::Parse(s.clone()))?;
        Prime::new(p)
    }
}

impl From<Prime> for String {
    fn from(p: Prime) -> String {
        p.0.to_string()
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic primality for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &b in &MR_BASES {
        if n == b {
            return true;
        }
        if n % b == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &is_p)| is_p.then_some(i as u64))
        .collect()
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulm(x, x) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorization `[(p, e)]` in increasing order; `factor_u64(1)` is empty.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    fn go(n: u64, out: &mut Vec<u64>) {
        if n == 1 {
            return;
        }
        if is_prime_u64(n) {
            out.push(n);
            return;
        }
        let d = pollard_rho(n);
        go(d, out);
        go(n / d, out);
    }
    assert!(n > 0, "factor_u64(0)");
    let mut n = n;
    let mut raw = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while n % p == 0 {
            raw.push(p);
            n /= p;
        }
    }
    go(n, &mut raw);
    raw.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in raw {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// A modulus over ℚ: a positive integer `M` together with an optional
/// positivity condition at the real place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modulus {
    #[serde(with = "crate::serde_str")]
    value: u64,
    factors: Vec<(Prime, u32)>,
    real: bool,
}

impl Modulus {
    pub fn new(value: u64, real: bool) -> Result<Self, ArithError> {
        if value == 0 {
            return Err(ArithError::Overflow("modulus 0".into()));
        }
        let factors = factor_u64(value)
            .into_iter()
            .map(|(p, e)| (Prime(p), e))
            .collect();
        Ok(Modulus {
            value,
            factors,
            real,
        })
    }

    /// Builds `∏ p^e` from its factorization.
    pub fn from_factors(factors: &[(u64, u32)], real: bool) -> Result<Self, ArithError> {
        let mut value: u64 = 1;
        for &(p, e) in factors {
            let pe = p
                .checked_pow(e)
                .ok_or_else(|| ArithError::Overflow(format!("{p}^{e}")))?;
            value = value
                .checked_mul(pe)
                .ok_or_else(|| ArithError::Overflow("modulus".into()))?;
        }
        Self::new(value, real)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(Prime, u32)] {
        &self.factors
    }

    pub fn real_condition(&self) -> bool {
        self.real
    }

    pub fn divides_by(&self, p: u64) -> bool {
        self.value % p == 0
    }

    /// Internal consistency of the stored factorization.
    pub fn is_consistent(&self) -> bool {
        self.value >= 1
            && self
                .factors
                .iter()
                .try_fold(1u64, |acc, (p, e)| acc.checked_mul(p.get().checked_pow(*e)?))
                == Some(self.value)
            && self.factors.iter().all(|(p, _)| is_prime_u64(p.get()))
    }
}

/// Least positive prime `π ≡ r (mod M)` outside `exclusions`.
///
/// Over ℚ every ideal is principal with a positive generator, so this
/// congruence is exactly the condition that `(π)` lie in the trivial ray
/// class modulo `M·∞`.
pub fn prime_in_progression(
    r: &BigInt,
    m: &Modulus,
    exclusions: &BTreeSet<u64>,
    ceiling: Option<u128>,
) -> Result<Prime, ArithError> {
    let modulus = m.value();
    let r0 = r
        .mod_floor(&BigInt::from(modulus))
        .to_u64()
        .expect("residue below modulus");
    if r0.gcd(&modulus) != 1 && modulus > 1 {
        return Err(ArithError::NotCoprime {
            residue: r.clone(),
            modulus,
        });
    }
    let ceiling = ceiling.unwrap_or(DEFAULT_CEILING_FACTOR * modulus as u128);
    let mut candidate = r0 as u128;
    let step = modulus as u128;
    while candidate <= ceiling {
        if candidate > u64::MAX as u128 {
            break;
        }
        let c = candidate as u64;
        if is_prime_u64(c) && !exclusions.contains(&c) {
            return Ok(Prime(c));
        }
        candidate += step;
    }
    Err(ArithError::CeilingExceeded {
        residue: r0,
        modulus,
        ceiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sieve_least(r: u64, m: u64) -> u64 {
        let primes = primes_up_to(10_000_000);
        *primes.iter().find(|&&p| p % m == r % m).unwrap()
    }

    #[test]
    fn primality_matches_sieve() {
        let primes: BTreeSet<u64> = primes_up_to(20_000).into_iter().collect();
        for n in 0..20_000 {
            assert_eq!(is_prime_u64(n), primes.contains(&n), "{n}");
        }
        // strong pseudoprimes to several small bases
        assert!(!is_prime_u64(3_215_031_751));
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }

    #[test]
    fn progression_examples() {
        let none = BTreeSet::new();
        let m4 = Modulus::new(4, true).unwrap();
        let m3 = Modulus::new(3, true).unwrap();
        let m8 = Modulus::new(8, true).unwrap();
        let one = BigInt::from(1);
        assert_eq!(prime_in_progression(&one, &m4, &none, None).unwrap().get(), 5);
        assert_eq!(
            prime_in_progression(&BigInt::from(2), &m3, &none, None).unwrap().get(),
            2
        );
        assert_eq!(prime_in_progression(&one, &m8, &none, None).unwrap().get(), 17);
        assert_eq!(sieve_least(1, 4), 5);
        assert_eq!(sieve_least(1, 8), 17);
        let ex: BTreeSet<u64> = [5, 13].into_iter().collect();
        assert_eq!(prime_in_progression(&one, &m4, &ex, None).unwrap().get(), 17);
    }

    #[test]
    fn progression_against_sieve() {
        for m in [5u64, 12, 120, 1001, 120120] {
            let md = Modulus::new(m, true).unwrap();
            let got = prime_in_progression(&BigInt::from(1), &md, &BTreeSet::new(), None)
                .unwrap()
                .get();
            assert_eq!(got, sieve_least(1, m));
        }
    }

    #[test]
    fn progression_errors() {
        let m = Modulus::new(6, true).unwrap();
        assert!(matches!(
            prime_in_progression(&BigInt::from(2), &m, &BTreeSet::new(), None),
            Err(ArithError::NotCoprime { .. })
        ));
        let m = Modulus::new(120120, true).unwrap();
        assert!(matches!(
            prime_in_progression(&BigInt::from(1), &m, &BTreeSet::new(), Some(1000)),
            Err(ArithError::CeilingExceeded { .. })
        ));
    }

    #[test]
    fn factorization() {
        assert_eq!(factor_u64(1), vec![]);
        assert_eq!(factor_u64(120120), vec![(2, 3), (3, 1), (5, 1), (7, 1), (11, 1), (13, 1)]);
        assert_eq!(factor_u64(600851475143), vec![(71, 1), (839, 1), (1471, 1), (6857, 1)]);
        let big = 4_294_967_291u64 * 4_294_967_279;
        assert_eq!(factor_u64(big), vec![(4_294_967_279, 1), (4_294_967_291, 1)]);
        let m = Modulus::new(120120, true).unwrap();
        assert!(m.is_consistent());
    }
}
