//! Dense univariate polynomials over exact fields.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{format_rational, inv_mod, primes_up_to, Rational};

/// The operations a coefficient field has to provide.
///
/// `zero_elem()` and `one_elem()` return the constants of the prime field; elements of
/// extension fields are expected to combine with them transparently.
pub trait FieldElem: Clone + PartialEq + fmt::Debug {
    fn zero_elem() -> Self;
    fn one_elem() -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` for zero.
    fn inv(&self) -> Option<Self>;
    fn from_rational(q: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }
}

impl FieldElem for Rational {
    fn zero_elem() -> Self {
        Zero::zero()
    }
    fn one_elem() -> Self {
        One::one()
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

/// Coefficients are stored lowest degree first with no trailing zeros, so
/// the zero polynomial has an empty coefficient list.
#[derive(Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: FieldElem> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero_elem()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(T::one_elem())
    }

    /// The polynomial `z`.
    pub fn var() -> Self {
        Self::new(vec![T::zero_elem(), T::one_elem()])
    }

    /// `z - r`
    pub fn linear(r: &T) -> Self {
        Self::new(vec![r.neg(), T::one_elem()])
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| T::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero_elem)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero_elem)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero_elem(), |acc, c| acc.mul(x).add(c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i).sub(&other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(T::neg).collect())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero_elem(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero_elem() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self
    where
        T: 'a,
    {
        items.into_iter().fold(Self::one(), |acc, p| acc.mul(p))
    }

    /// Euclidean division. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lc_inv = divisor.leading().inv().expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        let n = self.coeffs.len();
        if n <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![T::zero_elem(); n - dd];
        for i in (0..n - dd).rev() {
            let c = rem[i + dd].mul(&lc_inv);
            if !c.is_zero_elem() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] = rem[i + j].sub(&c.mul(d));
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn divides(&self, other: &Self) -> bool {
        other.div_rem(self).1.is_zero()
    }

    pub fn monic(&self) -> Self {
        match self.leading().inv() {
            Some(inv) => self.scale(&inv),
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor (zero only if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.mul(&T::from_i64(i as i64)))
                .collect(),
        )
    }

    /// Whether only even powers of `z` occur.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero_elem())
    }

    /// For an even polynomial `s(z)`, the `h` with `s(z) = h(z²)`.
    pub fn even_part(&self) -> Self {
        Self::new(self.coeffs.iter().step_by(2).cloned().collect())
    }

    /// `h(z) ↦ h(z²)`
    pub fn compose_square(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.clone());
            out.push(T::zero_elem());
        }
        Self::new(out)
    }

    /// `z^n · f(1/z)` for `n ≥ deg f`.
    pub fn reversed(&self, n: usize) -> Self {
        let mut out = vec![T::zero_elem(); n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[n - i] = c.clone();
        }
        Self::new(out)
    }

    pub fn map<U: FieldElem>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    /// Yun's squarefree decomposition: `[(s_i, i)]` with `self = lc · ∏ s_i^i`,
    /// every `s_i` monic, squarefree and pairwise coprime. Characteristic zero only.
    pub fn squarefree_decomposition(&self) -> Vec<(Self, u32)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let mut c = df.div_rem(&a0).0;
        let mut d = c.sub(&b.derivative());
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            i += 1;
        }
        out
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree().unwrap_or(0) == 0
    }
}

impl<T: FieldElem> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl fmt::Display for Poly<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if Zero::is_zero(c) {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{}", format_rational(&mag))?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}z", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}z^{i}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

impl Poly<Rational> {
    /// Scales by the least positive rational making every coefficient an integer
    /// with content 1; returns the integer coefficient list.
    pub fn primitive_integer_coeffs(&self) -> Vec<BigInt> {
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * &den).to_integer()).collect();
        let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if content.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &content).collect()
    }

    /// Resultant, by the Euclidean remainder sequence over ℚ.
    pub fn resultant(&self, other: &Self) -> Rational {
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return num_traits::zero::<Rational>();
        };
        if db == 0 {
            return num_traits::pow(other.leading(), da);
        }
        let r = self.div_rem(other).1;
        let Some(dr) = r.degree() else {
            return num_traits::zero::<Rational>();
        };
        let sign = if (da * db) % 2 == 1 { -num_traits::one::<Rational>() } else { num_traits::one::<Rational>() };
        sign * num_traits::pow(other.leading(), da - dr) * other.resultant(&r)
    }

    /// `disc(f) = (-1)^{n(n-1)/2} res(f, f') / lc(f)`.
    pub fn discriminant(&self) -> Rational {
        let n = self.degree().unwrap_or(0);
        let r = self.resultant(&self.derivative());
        let sign = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
            -num_traits::one::<Rational>()
        } else {
            num_traits::one::<Rational>()
        };
        sign * r / self.leading()
    }

    /// All rational roots with multiplicity, in increasing order.
    pub fn rational_roots(&self) -> Vec<(Rational, u32)> {
        let mut out = Vec::new();
        for (s, mult) in self.squarefree_decomposition() {
            for r in squarefree_rational_roots(&s) {
                out.push((r, mult));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Rational roots of a squarefree polynomial: integer roots of the monic
/// transform are found modulo a prime of good reduction, Hensel-lifted past the
/// Cauchy bound, and confirmed exactly.
fn squarefree_rational_roots(f: &Poly<Rational>) -> Vec<Rational> {
    let Some(n) = f.degree() else { return Vec::new() };
    if n == 0 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    let mut f = f.clone();
    if Zero::is_zero(&f.coeff(0)) {
        roots.push(num_traits::zero::<Rational>());
        f = f.div_rem(&Poly::var()).0;
    }
    let a = f.primitive_integer_coeffs();
    let n = a.len() - 1;
    if n == 0 {
        return roots;
    }
    let lead = a[n].clone();
    // G(w) = lead^{n-1} F(w / lead), monic with integer coefficients.
    let g: Vec<BigInt> = (0..=n)
        .map(|i| {
            if i == n {
                BigInt::one()
            } else {
                &a[i] * num_traits::pow(lead.clone(), n - 1 - i)
            }
        })
        .collect();
    let bound = g.iter().map(|c| c.abs()).max().unwrap_or_default() + 1u32;
    let gq = Poly::new(g.iter().map(|c| Rational::from_integer(c.clone())).collect());
    let disc = gq.discriminant().to_integer();
    let q = primes_up_to(100_000)
        .into_iter()
        .find(|&q| q > 2 && !(&disc % q).is_zero())
        .expect("a prime of good reduction below 1e5");
    let qb = BigInt::from(q);
    let eval = |x: &BigInt, m: &BigInt| -> BigInt {
        g.iter().rev().fold(BigInt::zero(), |acc, c| (acc * x + c).mod_floor(m))
    };
    let deriv = |x: &BigInt, m: &BigInt| -> BigInt {
        g.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(BigInt::zero(), |acc, (i, c)| (acc * x + c * i).mod_floor(m))
    };
    let mut k = 1u32;
    let mut qk = qb.clone();
    while qk <= &bound * 2u32 {
        qk *= &qb;
        k += 1;
    }
    for r0 in 0..q {
        let mut r = BigInt::from(r0);
        if !eval(&r, &qb).is_zero() {
            continue;
        }
        let mut m = qb.clone();
        for _ in 1..k {
            m *= &qb;
            let d = deriv(&r, &m);
            let Some(di) = inv_mod(&d, &m) else { break };
            r = (&r - eval(&r, &m) * di).mod_floor(&m);
        }
        let half = &qk / 2u32;
        let w = if r > half { r - &qk } else { r };
        let exact = g
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * &w + c);
        if exact.is_zero() {
            roots.push(Rational::new(w, lead.clone()));
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rational};

    fn p(cs: &[i64]) -> Poly<Rational> {
        Poly::from_i64s(cs)
    }

    #[test]
    fn arithmetic_and_division() {
        let a = p(&[1, 2, 1]);
        let b = p(&[1, 1]);
        assert_eq!(a.div_rem(&b), (b.clone(), Poly::zero()));
        assert_eq!(b.mul(&b), a);
        assert_eq!(a.eval(&int(2)), int(9));
        assert_eq!(a.gcd(&p(&[-1, 0, 1])), b);
        assert_eq!(p(&[0, 0, 3]).derivative(), p(&[0, 6]));
        assert_eq!(Poly::<Rational>::zero().degree(), None);
    }

    #[test]
    fn squarefree() {
        assert!(p(&[1, 0, 0, 0, 0, 0, 1]).is_squarefree());
        let f = p(&[-1, 1]).pow(2).mul(&p(&[1, 0, 0, 0, 1]));
        assert!(!f.is_squarefree());
        let dec = f.squarefree_decomposition();
        assert_eq!(dec, vec![(p(&[1, 0, 0, 0, 1]), 1), (p(&[-1, 1]), 2)]);
    }

    #[test]
    fn discriminants() {
        // z^2 + bz + c has discriminant b^2 - 4c
        assert_eq!(p(&[3, 5, 1]).discriminant(), int(13));
        // z^3 - z: 4
        assert_eq!(p(&[0, -1, 0, 1]).discriminant(), int(4));
        assert_eq!(p(&[1, 2, 1]).discriminant(), int(0));
    }

    #[test]
    fn rational_roots_found() {
        let f = p(&[-1, 1]).mul(&p(&[3, 2])).mul(&p(&[1, 0, 1])).mul(&p(&[-7, 3]).pow(2));
        let roots = f.rational_roots();
        assert_eq!(
            roots,
            vec![(rational(-3, 2), 1), (int(1), 1), (rational(7, 3), 2)]
        );
        let g = p(&[-120140, 1]).mul(&p(&[-240261, 1])).mul(&p(&[-19, 1])).scale(&rational(1, 1_733_263_040_361));
        let r: Vec<_> = g.rational_roots().into_iter().map(|x| x.0).collect();
        assert_eq!(r, vec![int(19), int(120140), int(240261)]);
        assert!(p(&[1, 0, 1]).rational_roots().is_empty());
        assert_eq!(p(&[0, 0, 1]).rational_roots(), vec![(int(0), 2)]);
    }

    #[test]
    fn even_helpers() {
        let f = p(&[-1, 0, 0, 0, 0, 0, 1]);
        assert!(f.is_even());
        assert_eq!(f.even_part(), p(&[-1, 0, 0, 1]));
        assert_eq!(f.even_part().compose_square(), f);
        assert_eq!(p(&[1, 2, 3]).reversed(4), p(&[0, 0, 3, 2, 1]));
        assert_eq!(format!("{}", p(&[14, 7, 0, 0, 0, 0, 1])), "z^6 + 7*z + 14");
    }
}
