use std::fmt;

use serde::{Deserialize, Serialize};

use super::{classify_case, riemann_hurwitz_genus, setup_quantities, CalculusError, Case, SetupQuantities, Triple};

/// Unknown invariants of the fiber product `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    #[serde(rename = "P(Y)")]
    PeriodY,
    #[serde(rename = "I(Y)")]
    IndexY,
    #[serde(rename = "g(Y)")]
    GenusY,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::PeriodY => "P(Y)",
            Symbol::IndexY => "I(Y)",
            Symbol::GenusY => "g(Y)",
        })
    }
}

/// Either a known integer together with the expression it was computed
/// from, or one of the unknowns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Value {
        label: String,
        #[serde(with = "crate::serde_str")]
        value: u64,
    },
    Unknown {
        symbol: Symbol,
    },
}

impl Operand {
    pub fn value(label: impl Into<String>, value: u64) -> Self {
        Operand::Value { label: label.into(), value }
    }

    pub fn unknown(symbol: Symbol) -> Self {
        Operand::Unknown { symbol }
    }

    fn text(&self) -> String {
        match self {
            Operand::Value { label, value } if label == &value.to_string() => label.clone(),
            Operand::Value { label, value } => format!("{label} = {value}"),
            Operand::Unknown { symbol } => symbol.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Divides,
    Equals,
    Parity,
    Assumption,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Input to the squeeze: an instantiated fact, setup arithmetic, or assumption.
    Premise,
    /// Follows from the premises; re-checked against the conclusion.
    Derived,
}

/// One step. Semantics by `kind`:
/// `divides [a, b]` is `a | b` (or `a ∤ b` when `negated`);
/// `equals [a, b]` is `a = b`; `parity [a]` is `a ≡ 0 (2)` iff `even`;
/// `assumption [a, b]` is an unverified `a | b` carrying `hypotheses`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub claim: String,
    pub kind: Relation,
    pub operands: Vec<Operand>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub negated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub even: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypotheses: Vec<String>,
    pub role: Role,
    pub justification_tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveInvariantRecord {
    pub label: String,
    #[serde(with = "crate::serde_str")]
    pub genus: u64,
    #[serde(with = "crate::serde_str")]
    pub period: u64,
    #[serde(with = "crate::serde_str")]
    pub index: u64,
    pub hypotheses: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusion {
    #[serde(with = "crate::serde_str")]
    pub period: u64,
    #[serde(with = "crate::serde_str")]
    pub index: u64,
    #[serde(with = "crate::serde_str")]
    pub genus: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub triple: Triple,
    pub case: Case,
    pub setup: SetupQuantities,
    pub records: Vec<CurveInvariantRecord>,
    pub steps: Vec<Step>,
    pub conclusion: Conclusion,
}

impl DerivationTrace {
    /// Every hypothesis attached to an assumption step or record.
    pub fn hypotheses(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let all = self.records.iter().flat_map(|r| r.hypotheses.iter());
        for h in all.chain(self.steps.iter().flat_map(|s| s.hypotheses.iter())) {
            if !out.contains(h) {
                out.push(h.clone());
            }
        }
        out
    }
}

struct Builder {
    steps: Vec<Step>,
}

fn v(label: &str, value: u64) -> Operand {
    Operand::value(label, value)
}

fn lit(value: u64) -> Operand {
    Operand::value(value.to_string(), value)
}

fn sym(s: Symbol) -> Operand {
    Operand::unknown(s)
}

impl Builder {
    fn push(&mut self, kind: Relation, operands: Vec<Operand>, role: Role, tag: &str) -> &mut Step {
        let claim = match kind {
            Relation::Divides | Relation::Assumption => format!("{} | {}", operands[0].text(), operands[1].text()),
            Relation::Equals => format!("{} = {}", operands[0].text(), operands[1].text()),
            Relation::Parity => operands[0].text(),
        };
        self.steps.push(Step {
            claim,
            kind,
            operands,
            negated: false,
            even: None,
            hypotheses: Vec::new(),
            role,
            justification_tag: tag.to_string(),
        });
        self.steps.last_mut().expect("just pushed")
    }

    fn divides(&mut self, a: Operand, b: Operand, role: Role, tag: &str) {
        self.push(Relation::Divides, vec![a, b], role, tag);
    }

    fn not_divides(&mut self, a: Operand, b: Operand, tag: &str) {
        let s = self.push(Relation::Divides, vec![a, b], Role::Premise, tag);
        s.negated = true;
        s.claim = s.claim.replacen(" | ", " ∤ ", 1);
    }

    fn equals(&mut self, a: Operand, b: Operand, role: Role, tag: &str) {
        self.push(Relation::Equals, vec![a, b], role, tag);
    }

    fn parity(&mut self, a: Operand, even: bool, role: Role, tag: &str) {
        let s = self.push(Relation::Parity, vec![a], role, tag);
        s.even = Some(even);
        s.claim = format!("{} is {}", s.claim, if even { "even" } else { "odd" });
    }

    fn assume_divides(&mut self, a: Operand, b: Operand, hypotheses: &[&str], tag: &str) {
        let s = self.push(Relation::Assumption, vec![a, b], Role::Premise, tag);
        s.hypotheses = hypotheses.iter().map(|h| h.to_string()).collect();
    }

    /// `a | x | b` as two steps.
    fn between(&mut self, lo: Operand, x: Symbol, hi: Operand, tag: &str) {
        self.divides(lo, sym(x), Role::Premise, tag);
        self.divides(sym(x), hi, Role::Premise, tag);
    }
}

const CASE_I_HYPOTHESES: [&str; 3] = [
    "rank(E') >= 1 assumed",
    "a = x(Q'') for a point Q'' of E'' above a non-torsion point of E'",
    "the pullback of a degree-I divisor of X is twice a rational divisor D0 on Y",
];

/// Derive `(P(Y), I(Y), g(Y))` for the fiber product built from `t`,
/// recording every instantiated fact and squeeze step.
pub fn derive_period_index(t: Triple) -> Result<DerivationTrace, CalculusError> {
    let case = classify_case(t)?;
    let s = setup_quantities(t)?;
    let (py2, iy2) = case.genus2_ingredient();
    let (px, ix) = (s.p_hat, s.i_hat);
    let d = s.m * s.i_hat;
    let gy = riemann_hurwitz_genus(s.m, s.i_hat);
    let (p, i, g) = (t.p, t.i, t.g);
    let mut b = Builder { steps: Vec::new() };
    use Role::{Derived, Premise};
    use Symbol::{GenusY, IndexY, PeriodY};

    b.equals(v("g", g), lit(g), Premise, "input");
    b.equals(v("P", p), lit(p), Premise, "input");
    b.equals(v("I", i), lit(i), Premise, "input");
    b.not_divides(lit(4), v("I", i), "hypothesis.four_free_index");

    // setup
    let p_hat_expr = if p % 2 == 0 { "P/2" } else { "P" };
    let i_hat_expr = if i % 2 == 0 { "I/2" } else { "I" };
    b.equals(v("P^", s.p_hat), v(p_hat_expr, s.p_hat), Premise, "setup.p_hat");
    b.equals(v("I^", s.i_hat), v(i_hat_expr, s.i_hat), Premise, "setup.i_hat");
    b.divides(v("P^", s.p_hat), v("I^", s.i_hat), Premise, "setup.ell");
    b.equals(v("l", s.ell), v("I^/P^", s.ell), Premise, "setup.ell");
    b.divides(v("I^", s.i_hat), v("g-1", g - 1), Premise, "setup.m");
    b.equals(v("m", s.m), v("(g-1)/I^", s.m), Premise, "setup.m");

    // case classification
    b.parity(v("P", p), p % 2 == 0, Premise, "case.classify");
    if p % 2 == 1 {
        if case == Case::I {
            b.divides(v("I", i), v("P·P", p * p), Premise, "case.classify");
        } else {
            b.not_divides(v("I", i), v("P·P", p * p), "case.classify");
        }
    }

    // ingredients
    b.equals(v("P(X)", px), v("P^", s.p_hat), Premise, "ingredient.X");
    b.equals(v("I(X)", ix), v("I^", s.i_hat), Premise, "ingredient.X");
    b.equals(v("P(Y')", py2), lit(py2), Premise, "ingredient.Y'");
    b.equals(v("I(Y')", iy2), lit(iy2), Premise, "ingredient.Y'");

    // genus of the fiber product
    b.equals(v("d", d), v("m·I(X)", s.m * ix), Premise, "fiber.degree");
    b.equals(sym(GenusY), v("d+1", d + 1), Premise, "riemann_hurwitz");

    // the four divisibility facts
    b.between(v("P(X)", px), PeriodY, v("2·P(X)", 2 * px), "fact.1");
    b.between(v("I(X)", ix), IndexY, v("2·I(X)", 2 * ix), "fact.2");
    b.between(v("P(Y')", py2), PeriodY, v("m·I(X)·P(Y')", s.m * ix * py2), "fact.3");
    b.between(v("I(Y')", iy2), IndexY, v("m·I(X)·I(Y')", s.m * ix * iy2), "fact.4");
    b.divides(sym(PeriodY), sym(IndexY), Premise, "period_divides_index");

    match case {
        Case::I => {
            b.parity(v("P", p), false, Premise, "case_i.parity");
            b.parity(v("I", i), false, Premise, "case_i.parity");
            b.assume_divides(sym(IndexY), v("I", i), &CASE_I_HYPOTHESES, "case_i.halving");
            b.equals(sym(IndexY), v("I", i), Derived, "case_i.index");
            b.parity(sym(PeriodY), false, Derived, "case_i.period_odd");
            b.equals(sym(PeriodY), v("P", p), Derived, "case_i.period");
        }
        Case::Ii => {
            b.parity(v("I", i), true, Premise, "case_ii.parity");
            b.parity(v("I(X)", ix), false, Premise, "case_ii.parity");
            // else 2(g-1)/I would be even and admissibility would force I | P²
            b.parity(v("m", s.m), false, Premise, "case_ii.m_odd");
            b.parity(v("m·I(X)", s.m * ix), false, Premise, "case_ii.m_odd");
            b.equals(sym(PeriodY), v("P(X)", px), Derived, "case_ii.period");
            b.divides(lit(2), sym(IndexY), Derived, "case_ii.index_even");
            b.equals(sym(IndexY), v("2·I(X)", 2 * ix), Derived, "case_ii.index");
        }
        Case::Iii => {
            b.parity(v("P(X)", px), false, Premise, "case_iii.parity");
            b.parity(v("I(X)", ix), false, Premise, "case_iii.parity");
            b.equals(sym(PeriodY), v("2·P(X)", 2 * px), Derived, "case_iii.squeeze");
            b.equals(sym(IndexY), v("2·I(X)", 2 * ix), Derived, "case_iii.squeeze");
        }
    }
    b.equals(sym(PeriodY), v("P", p), Derived, "conclusion");
    b.equals(sym(IndexY), v("I", i), Derived, "conclusion");
    b.equals(sym(GenusY), v("g", g), Derived, "conclusion");

    let x_hyp = vec!["exists by the genus-1 realisation of admissible (P^, I^)".to_string()];
    let mut y2_hyp = vec![format!("genus-2 curve with (P, I) = ({py2}, {iy2})")];
    if case == Case::I {
        y2_hyp.extend(CASE_I_HYPOTHESES.iter().map(|h| h.to_string()));
    }
    let records = vec![
        CurveInvariantRecord { label: "X".into(), genus: 1, period: px, index: ix, hypotheses: x_hyp },
        CurveInvariantRecord { label: "Y'".into(), genus: 2, period: py2, index: iy2, hypotheses: y2_hyp },
        CurveInvariantRecord { label: "Y".into(), genus: gy, period: p, index: i, hypotheses: Vec::new() },
    ];

    Ok(DerivationTrace {
        triple: t,
        case,
        setup: s,
        records,
        steps: b.steps,
        conclusion: Conclusion { period: p, index: i, genus: gy },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_i_records_the_rank_assumption() {
        let tr = derive_period_index(Triple::new(4, 3, 3)).unwrap();
        assert_eq!(tr.case, Case::I);
        assert_eq!(tr.conclusion, Conclusion { period: 3, index: 3, genus: 4 });
        assert!(tr.hypotheses().iter().any(|h| h.contains("rank")));
    }

    #[test]
    fn case_ii_states_m_odd() {
        let tr = derive_period_index(Triple::new(4, 1, 2)).unwrap();
        assert_eq!(tr.case, Case::Ii);
        assert_eq!(tr.conclusion, Conclusion { period: 1, index: 2, genus: 4 });
        assert!(tr.steps.iter().any(|s| s.claim == "m = 3 is odd"));
    }

    #[test]
    fn four_dividing_index_is_rejected() {
        assert_eq!(
            derive_period_index(Triple::new(3, 2, 4)),
            Err(CalculusError::FourDividesIndex(4))
        );
    }
}
