//! Admissibility of `(g, P, I)`, the divisibility constraints of finite maps,
//! and derivation traces for genus `g ≥ 3`.

mod check;
mod trace;

pub use check::{check_trace, CheckError, CheckReport};
pub use trace::{
    derive_period_index, Conclusion, CurveInvariantRecord, DerivationTrace, Operand, Relation, Role, Step, Symbol,
};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    #[serde(with = "crate::serde_str")]
    pub g: u64,
    #[serde(with = "crate::serde_str")]
    pub p: u64,
    #[serde(with = "crate::serde_str")]
    pub i: u64,
}

impl Triple {
    pub fn new(g: u64, p: u64, i: u64) -> Self {
        Triple { g, p, i }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(g={}, P={}, I={})", self.g, self.p, self.i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    PositivePeriodIndex,
    PeriodDividesIndex,
    IndexDividesTwicePeriodSquared,
    IndexDividesCanonicalDegree,
    IndexDividesPeriodSquared,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::PositivePeriodIndex => "P, I >= 1",
            Condition::PeriodDividesIndex => "P | I",
            Condition::IndexDividesTwicePeriodSquared => "I | 2P^2",
            Condition::IndexDividesCanonicalDegree => "I | 2(g-1)",
            Condition::IndexDividesPeriodSquared => "I | P^2 (2(g-1)/I or P even)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalculusError {
    #[error("{triple} is not admissible: {}", failed.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))]
    Inadmissible { triple: Triple, failed: Vec<Condition> },
    #[error("4 divides I = {0}; this case is not covered")]
    FourDividesIndex(u64),
    #[error("genus {0} is below 3; genus 1 and 2 are handled separately")]
    GenusTooSmall(u64),
    #[error("integrality check failed: {0}")]
    Integrality(String),
}

fn divides(a: u64, b: u64) -> bool {
    if a == 0 {
        b == 0
    } else {
        b % a == 0
    }
}

/// Global conditions; returns the violated ones (empty iff admissible).
pub fn admissibility_failures(t: Triple) -> Vec<Condition> {
    let Triple { g, p, i } = t;
    if p == 0 || i == 0 {
        return vec![Condition::PositivePeriodIndex];
    }
    let mut failed = Vec::new();
    if !divides(p, i) {
        failed.push(Condition::PeriodDividesIndex);
    }
    if !divides(i, 2 * p * p) {
        failed.push(Condition::IndexDividesTwicePeriodSquared);
    }
    let canon = 2 * g.saturating_sub(1);
    let canon_ok = g >= 1 && divides(i, canon);
    if !canon_ok {
        failed.push(Condition::IndexDividesCanonicalDegree);
    }
    // 0 counts as even, so g = 1 always takes this branch
    let quotient_even = canon_ok && (canon / i) % 2 == 0;
    if (quotient_even || p % 2 == 0) && !divides(i, p * p) {
        failed.push(Condition::IndexDividesPeriodSquared);
    }
    failed
}

pub fn is_admissible(t: Triple) -> (bool, Vec<Condition>) {
    let failed = admissibility_failures(t);
    (failed.is_empty(), failed)
}

/// Local conditions: `P | g - 1`, `I | 2P`, and `I = P` when `(g - 1)/P` is even.
pub fn is_locally_admissible(t: Triple) -> bool {
    let Triple { g, p, i } = t;
    if g == 0 || p == 0 || i == 0 {
        return false;
    }
    let n = g - 1;
    if !divides(p, n) || !divides(i, 2 * p) {
        return false;
    }
    (n / p) % 2 == 1 || i == p
}

/// Constraints on `(P(C), I(C))` for a degree-`d` map `C → C'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapdivConstraints {
    pub target_period: u64,
    pub target_index: u64,
    pub degree: u64,
}

impl MapdivConstraints {
    pub fn period_ok(&self, p: u64) -> bool {
        divides(self.target_period, p) && divides(p, self.degree * self.target_period)
    }

    pub fn index_ok(&self, i: u64) -> bool {
        divides(self.target_index, i) && divides(i, self.degree * self.target_index)
    }

    pub fn period_candidates(&self) -> Vec<u64> {
        (1..=self.degree * self.target_period).filter(|&p| self.period_ok(p)).collect()
    }

    pub fn index_candidates(&self) -> Vec<u64> {
        (1..=self.degree * self.target_index).filter(|&i| self.index_ok(i)).collect()
    }
}

/// `P(C') | P(C) | d·P(C')` and `I(C') | I(C) | d·I(C')`.
pub fn mapdiv_constraints(p_target: u64, i_target: u64, d: u64) -> MapdivConstraints {
    MapdivConstraints {
        target_period: p_target,
        target_index: i_target,
        degree: d.max(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupQuantities {
    #[serde(with = "crate::serde_str")]
    pub p_hat: u64,
    #[serde(with = "crate::serde_str")]
    pub i_hat: u64,
    #[serde(with = "crate::serde_str")]
    pub ell: u64,
    #[serde(with = "crate::serde_str")]
    pub m: u64,
}

fn halve_if_even(n: u64) -> u64 {
    if n % 2 == 0 {
        n / 2
    } else {
        n
    }
}

fn require_supported(t: Triple) -> Result<(), CalculusError> {
    let failed = admissibility_failures(t);
    if !failed.is_empty() {
        return Err(CalculusError::Inadmissible { triple: t, failed });
    }
    if t.i % 4 == 0 {
        return Err(CalculusError::FourDividesIndex(t.i));
    }
    if t.g < 3 {
        return Err(CalculusError::GenusTooSmall(t.g));
    }
    Ok(())
}

pub fn setup_quantities(t: Triple) -> Result<SetupQuantities, CalculusError> {
    require_supported(t)?;
    let p_hat = halve_if_even(t.p);
    let i_hat = halve_if_even(t.i);
    if i_hat % p_hat != 0 {
        return Err(CalculusError::Integrality(format!("P^ = {p_hat} does not divide I^ = {i_hat}")));
    }
    if (t.g - 1) % i_hat != 0 {
        return Err(CalculusError::Integrality(format!("I^ = {i_hat} does not divide g-1 = {}", t.g - 1)));
    }
    Ok(SetupQuantities {
        p_hat,
        i_hat,
        ell: i_hat / p_hat,
        m: (t.g - 1) / i_hat,
    })
}

/// Genus of an unramified degree-`mÎ` cover of a genus-2 curve.
pub fn riemann_hurwitz_genus(m: u64, i_hat: u64) -> u64 {
    m * i_hat + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    I,
    Ii,
    Iii,
}

impl Case {
    /// `(P(Y'), I(Y'))` of the genus-2 ingredient.
    pub fn genus2_ingredient(self) -> (u64, u64) {
        match self {
            Case::I => (1, 1),
            Case::Ii => (1, 2),
            Case::Iii => (2, 2),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "i",
            Case::Ii => "ii",
            Case::Iii => "iii",
        })
    }
}

/// Case iii when `P` is even; otherwise case i when `I | P²`, else case ii.
pub fn classify_case(t: Triple) -> Result<Case, CalculusError> {
    require_supported(t)?;
    Ok(if t.p % 2 == 0 {
        Case::Iii
    } else if divides(t.i, t.p * t.p) {
        Case::I
    } else {
        Case::Ii
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(g: u64, p: u64, i: u64) -> Triple {
        Triple::new(g, p, i)
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(t(2, 1, 2)).0);
        let (ok, failed) = is_admissible(t(1, 2, 8));
        assert!(!ok);
        assert!(failed.contains(&Condition::IndexDividesPeriodSquared));
        assert!(is_admissible(t(3, 2, 4)).0);
    }

    #[test]
    fn local_examples() {
        assert!(is_locally_admissible(t(2, 1, 2)));
        assert!(is_locally_admissible(t(3, 2, 2)));
        assert!(!is_locally_admissible(t(3, 1, 2)));
    }

    #[test]
    fn mapdiv_examples() {
        assert_eq!(mapdiv_constraints(1, 1, 2).period_candidates(), vec![1, 2]);
        assert_eq!(mapdiv_constraints(5, 5, 1).period_candidates(), vec![5]);
        assert_eq!(mapdiv_constraints(1, 2, 6).index_candidates(), vec![2, 4, 6, 12]);
    }

    #[test]
    fn setup_examples() {
        let s = setup_quantities(t(4, 3, 3)).unwrap();
        assert_eq!((s.p_hat, s.i_hat, s.ell, s.m), (3, 3, 1, 1));
        let s = setup_quantities(t(4, 1, 2)).unwrap();
        assert_eq!((s.p_hat, s.i_hat, s.ell, s.m), (1, 1, 1, 3));
        let s = setup_quantities(t(3, 2, 2)).unwrap();
        assert_eq!((s.p_hat, s.i_hat, s.ell, s.m), (1, 1, 1, 2));
        assert_eq!(riemann_hurwitz_genus(1, 3), 4);
        assert_eq!(riemann_hurwitz_genus(3, 1), 4);
        assert_eq!(riemann_hurwitz_genus(1, 1), 2);
    }

    #[test]
    fn cases() {
        assert_eq!(classify_case(t(4, 3, 3)).unwrap(), Case::I);
        assert_eq!(classify_case(t(4, 1, 2)).unwrap(), Case::Ii);
        assert_eq!(classify_case(t(3, 2, 2)).unwrap(), Case::Iii);
        assert_eq!(classify_case(t(3, 2, 4)), Err(CalculusError::FourDividesIndex(4)));
    }
}
