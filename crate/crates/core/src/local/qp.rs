//! Decision procedure for `C(ℚ_p) ≠ ∅` on `C: y² = f(z)`, `deg f ∈ {5, 6}`.
//!
//! `ℙ¹(ℚ_p)` is covered by the affine chart `z ∈ ℤ_p` and the reversed chart
//! `w = 1/z ∈ pℤ_p` with `G(w) = w⁶ f(1/w)`. Each chart is searched by residue
//! discs `a + p^k ℤ_p`; the polynomial `H(t) = F(a + p^k t)` is carried along
//! so that every test only looks at the valuations of its coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::LocalError;
use crate::arith::{is_square_local, sqrt_mod_prime_power, split_int, Place, Prime, Rational};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Affine,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// `F(z)` is a nonzero square in ℚ_p; `y` approximates its root.
    Square,
    /// `F` has a root in ℤ_p near `z` by Hensel's criterion `v(F(z)) > 2v(F'(z))`.
    Root,
}

/// A point of `y² = F(z)`, `F = scale² · f` in the given chart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpWitness {
    pub p: Prime,
    pub chart: Chart,
    pub kind: WitnessKind,
    #[serde(with = "crate::serde_str")]
    pub scale: BigInt,
    #[serde(with = "crate::serde_str")]
    pub z: BigInt,
    #[serde(with = "crate::serde_str")]
    pub y: BigInt,
    pub precision: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpEmptyTrace {
    pub p: Prime,
    #[serde(with = "crate::serde_str")]
    pub scale: BigInt,
    pub discs_examined: u64,
    pub max_depth: u32,
    pub depth_cap: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum QpEvidence {
    Point(QpWitness),
    Empty(QpEmptyTrace),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QpDecision {
    pub exists: bool,
    pub evidence: QpEvidence,
}

/// Least positive `d` with `d² f` integral, and the integer coefficients of `d² f`.
fn integral_form(f: &Poly<Rational>) -> (BigInt, Vec<BigInt>) {
    let d = f
        .coeffs()
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let d2 = Rational::from_integer(&d * &d);
    let coeffs = f
        .coeffs()
        .iter()
        .map(|c| (c * &d2).to_integer())
        .collect();
    (d, coeffs)
}

fn chart_poly(coeffs: &[BigInt], chart: Chart) -> Vec<BigInt> {
    match chart {
        Chart::Affine => coeffs.to_vec(),
        Chart::Reversed => {
            let mut r = vec![BigInt::zero(); 7];
            for (i, c) in coeffs.iter().enumerate() {
                r[6 - i] = c.clone();
            }
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
            r
        }
    }
}

fn horner(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn vp(n: &BigInt, p: u64) -> Option<i64> {
    (!n.is_zero()).then(|| split_int(n, p).0)
}

fn is_square_int(n: &BigInt, p: Prime) -> bool {
    is_square_local(&Rational::from_integer(n.clone()), Place::Finite(p)).expect("nonzero")
}

/// Coefficients of `H(j + p t)`.
fn shift_scale(h: &[BigInt], j: u64, p: &BigInt) -> Vec<BigInt> {
    let mut c = h.to_vec();
    let n = c.len();
    let j = BigInt::from(j);
    if !j.is_zero() {
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let t = &c[k + 1] * &j;
                c[k] += t;
            }
        }
    }
    let mut pw = BigInt::one();
    for ci in c.iter_mut() {
        *ci *= &pw;
        pw *= p;
    }
    c
}

/// Whether the value class of `H` on `ℤ_p` is constant and nonsquare, given
/// `H(0) = c0 ≠ 0` and `v(cᵢ) ≥ m` for every `i ≥ 1`.
fn stably_nonsquare(c0: &BigInt, m: Option<i64>, p: Prime) -> bool {
    let v0 = vp(c0, p.get()).expect("nonzero");
    let gap = match m {
        None => i64::MAX,
        Some(m) => m - v0,
    };
    if gap <= 0 {
        return false;
    }
    if v0.is_odd() {
        return true;
    }
    // c0 itself is a nonsquare; the class is stable once the perturbation is small enough
    gap >= if p.get() == 2 { 3 } else { 1 }
}

/// `y` with `y² ≡ c (mod p^(v(c)+extra))` for a nonzero square `c ∈ ℤ_p`.
fn square_root_approx(c: &BigInt, p: Prime, extra: u32) -> (BigInt, u32) {
    let pp = p.get();
    let (v, u) = split_int(c, pp);
    let e = (v / 2) as u32;
    let pb = p.big();
    let r = if pp == 2 {
        let m = BigInt::one() << extra;
        let u = u.mod_floor(&m);
        let mut y = BigInt::one();
        for j in 3..extra {
            let mj1 = BigInt::one() << (j + 1);
            if !(&y * &y - &u).mod_floor(&mj1).is_zero() {
                y += BigInt::one() << (j - 1);
            }
        }
        y.mod_floor(&m)
    } else {
        sqrt_mod_prime_power(&u, pp, extra).expect("unit square")
    };
    (r * pb.pow(e), v as u32 + extra)
}

const SQUARE_EXTRA_DIGITS: u32 = 8;

struct Search {
    p: Prime,
    pb: BigInt,
    scale: BigInt,
    discs: u64,
    max_depth: u32,
}

impl Search {
    fn point(&self, chart: Chart, kind: WitnessKind, z: BigInt, c0: &BigInt) -> QpWitness {
        let (y, precision) = match kind {
            WitnessKind::Square => square_root_approx(c0, self.p, SQUARE_EXTRA_DIGITS),
            WitnessKind::Root => (BigInt::zero(), 0),
        };
        QpWitness {
            p: self.p,
            chart,
            kind,
            scale: self.scale.clone(),
            z,
            y,
            precision,
        }
    }

    fn run_chart(
        &mut self,
        chart: Chart,
        poly: &[BigInt],
        cap: u32,
    ) -> Result<Option<QpWitness>, LocalError> {
        let pp = self.p.get();
        let deriv: Vec<BigInt> = poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i)
            .collect();
        // (center, level, H)
        let mut stack: Vec<(BigInt, u32, Vec<BigInt>)> = match chart {
            Chart::Affine => vec![(BigInt::zero(), 0, poly.to_vec())],
            Chart::Reversed => vec![(BigInt::zero(), 1, shift_scale(poly, 0, &self.pb))],
        };
        while let Some((a, k, h)) = stack.pop() {
            self.discs += 1;
            self.max_depth = self.max_depth.max(k);
            let c0 = &h[0];
            if c0.is_zero() {
                return Ok(Some(self.point(chart, WitnessKind::Root, a, c0)));
            }
            if is_square_int(c0, self.p) {
                return Ok(Some(self.point(chart, WitnessKind::Square, a, c0)));
            }
            let fa = horner(&deriv, &a);
            if let Some(vd) = vp(&fa, pp) {
                if vp(c0, pp).expect("nonzero") > 2 * vd {
                    return Ok(Some(self.point(chart, WitnessKind::Root, a, c0)));
                }
            }
            let m = h[1..].iter().filter_map(|c| vp(c, pp)).min();
            if stably_nonsquare(c0, m, self.p) {
                continue;
            }
            if k >= cap {
                return Err(LocalError::DepthExceeded { p: pp, cap });
            }
            let child_m = m.map(|m| m + 1);
            let step = self.pb.pow(k);
            for j in 0..pp {
                let center = &a + &step * j;
                let cj = horner(&h, &BigInt::from(j));
                if !cj.is_zero() {
                    if is_square_int(&cj, self.p) {
                        self.discs += 1;
                        return Ok(Some(self.point(chart, WitnessKind::Square, center, &cj)));
                    }
                    if stably_nonsquare(&cj, child_m, self.p) {
                        self.discs += 1;
                        continue;
                    }
                }
                stack.push((center, k + 1, shift_scale(&h, j, &self.pb)));
            }
        }
        Ok(None)
    }
}

fn depth_cap(poly: &[BigInt], p: u64) -> u32 {
    let f = Poly::new(poly.iter().cloned().map(Rational::from_integer).collect());
    let disc = f.discriminant();
    let vd = vp(&(disc.numer() * disc.denom()), p).unwrap_or(0).max(0) as u32;
    let vl = vp(poly.last().expect("nonzero"), p).unwrap_or(0).max(0) as u32;
    let v2 = if p == 2 { 1 } else { 0 };
    vd + vl + 2 * v2 + 2 + 4
}

/// Decides whether `y² = f(z)` has a point over ℚ_p, points at infinity included.
pub fn qp_points_exist(f: &Poly<Rational>, p: Prime) -> Result<QpDecision, LocalError> {
    let deg = f.degree().unwrap_or(0);
    if !(5..=6).contains(&deg) {
        return Err(LocalError::UnsupportedDegree(deg));
    }
    if !f.is_squarefree() {
        return Err(LocalError::NotSquarefree(f.to_string()));
    }
    let (scale, coeffs) = integral_form(f);
    let mut search = Search {
        p,
        pb: p.big(),
        scale: scale.clone(),
        discs: 0,
        max_depth: 0,
    };
    let mut cap = 0;
    for chart in [Chart::Affine, Chart::Reversed] {
        let poly = chart_poly(&coeffs, chart);
        let c = depth_cap(&poly, p.get());
        cap = cap.max(c);
        if let Some(w) = search.run_chart(chart, &poly, c)? {
            return Ok(QpDecision {
                exists: true,
                evidence: QpEvidence::Point(w),
            });
        }
    }
    Ok(QpDecision {
        exists: false,
        evidence: QpEvidence::Empty(QpEmptyTrace {
            p,
            scale,
            discs_examined: search.discs,
            max_depth: search.max_depth,
            depth_cap: cap,
        }),
    })
}

impl QpWitness {
    /// Re-checks the witness against `f` from scratch.
    pub fn verify(&self, f: &Poly<Rational>) -> bool {
        let pp = self.p.get();
        if self.scale.is_zero() {
            return false;
        }
        let s2 = Rational::from_integer(&self.scale * &self.scale);
        let scaled: Option<Vec<BigInt>> = f
            .coeffs()
            .iter()
            .map(|c| {
                let x = c * &s2;
                x.is_integer().then(|| x.to_integer())
            })
            .collect();
        let Some(scaled) = scaled else { return false };
        let poly = chart_poly(&scaled, self.chart);
        if self.chart == Chart::Reversed && vp(&self.z, pp).is_none_or(|v| v < 1) && !self.z.is_zero() {
            return false;
        }
        let value = horner(&poly, &self.z);
        match self.kind {
            WitnessKind::Root => {
                if value.is_zero() {
                    return true;
                }
                let d: Vec<BigInt> = poly.iter().enumerate().skip(1).map(|(i, c)| c * i).collect();
                match vp(&horner(&d, &self.z), pp) {
                    Some(vd) => vp(&value, pp).expect("nonzero") > 2 * vd,
                    None => false,
                }
            }
            WitnessKind::Square => {
                let Some(v) = vp(&value, pp) else { return false };
                let need = v + if pp == 2 { 3 } else { 1 };
                if v.is_odd() || (self.precision as i64) < need {
                    return false;
                }
                let m = self.p.big().pow(self.precision);
                (&self.y * &self.y - &value).mod_floor(&m).is_zero() && !self.y.is_negative()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn examples() {
        let f = Poly::from_i64s(&[1, 0, 0, 0, 0, 0, 1]);
        let d = qp_points_exist(&f, pr(3)).unwrap();
        assert!(d.exists);
        let QpEvidence::Point(w) = d.evidence else { panic!() };
        assert!(w.verify(&f));

        let f = Poly::from_i64s(&[0, -1, 0, 0, 0, 1]);
        for p in [2, 3, 5, 7] {
            let d = qp_points_exist(&f, pr(p)).unwrap();
            assert!(d.exists);
        }
    }

    #[test]
    fn empty_example() {
        // z² + 1 and z⁴ + 1 are 3-adic units on ℤ₃ and the leading coefficient is 3,
        // so every value of f has odd valuation, at infinity too.
        let f = Poly::from_i64s(&[3, 0, 3]).mul(&Poly::from_i64s(&[1, 0, 0, 0, 1]));
        let d = qp_points_exist(&f, pr(3)).unwrap();
        assert!(!d.exists, "{:?}", d);
    }

    #[test]
    fn rejects_bad_input() {
        let f = Poly::from_i64s(&[1, 0, 1]).pow(3);
        assert!(matches!(
            qp_points_exist(&f, pr(3)),
            Err(LocalError::NotSquarefree(_))
        ));
        let f = Poly::from_i64s(&[1, 0, 1]);
        assert!(qp_points_exist(&f, pr(3)).is_err());
    }

    #[test]
    fn tampered_witness_fails() {
        let f = Poly::from_i64s(&[1, 0, 0, 0, 0, 0, 1]);
        let QpEvidence::Point(mut w) = qp_points_exist(&f, pr(5)).unwrap().evidence else {
            panic!()
        };
        assert!(w.verify(&f));
        w.y += 1;
        assert!(!w.verify(&f));
    }
}
