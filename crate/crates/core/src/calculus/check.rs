//! A separate interpreter for derivation traces. It shares only the data
//! types with the deriving code: labels are re-evaluated from scratch, every
//! integer claim is re-tested, and the unknowns are recovered by exhaustive
//! search over the premises alone.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::trace::{DerivationTrace, Operand, Relation, Role, Step, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("malformed step {step}: {reason}")]
    Malformed { step: usize, reason: String },
    #[error("atom {atom} is given both {first} and {second}")]
    AtomConflict { atom: String, first: u64, second: u64 },
    #[error("step {step}: {label} evaluates to {computed}, trace states {stated}")]
    ValueMismatch { step: usize, label: String, stated: u64, computed: i128 },
    #[error("step {step} does not hold: {claim}")]
    StepFails { step: usize, claim: String },
    #[error("premises admit {0} candidate values for the unknowns, expected exactly one")]
    NotUnique(usize),
    #[error("conclusion {stated:?} disagrees with {expected:?}")]
    ConclusionMismatch { stated: (u64, u64, u64), expected: (u64, u64, u64) },
    #[error("record {0} disagrees with the step values")]
    RecordMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub steps_checked: usize,
    pub search_bound: u64,
    pub solutions: Vec<(u64, u64, u64)>,
    pub assumptions: Vec<String>,
}

type Atoms = BTreeMap<String, u64>;

struct Parser<'a> {
    s: &'a [char],
    pos: usize,
    atoms: &'a Atoms,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<i128, String> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<i128, String> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                '·' | '*' => {
                    self.pos += 1;
                    acc *= self.factor()?;
                }
                '/' => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if d == 0 || acc % d != 0 {
                        return Err(format!("{acc}/{d} is not an integer"));
                    }
                    acc /= d;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<i128, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err("unbalanced parenthesis".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let text: String = self.s[start..self.pos].iter().collect();
                text.parse().map_err(|_| format!("bad integer {text}"))
            }
            Some(c) if c.is_alphabetic() => {
                let name = self.atom_name();
                self.atoms
                    .get(&name)
                    .map(|&v| v as i128)
                    .ok_or_else(|| format!("undefined atom {name}"))
            }
            other => Err(format!("unexpected {other:?}")),
        }
    }

    /// A letter, optional `^`/`'` marks, and an optional `(X)`-style suffix.
    fn atom_name(&mut self) -> String {
        let start = self.pos;
        self.pos += 1;
        while matches!(self.peek(), Some('^') | Some('\'')) {
            self.pos += 1;
        }
        if self.peek() == Some('(') {
            if let Some(close) = self.s[self.pos..].iter().position(|&c| c == ')') {
                let inner = &self.s[self.pos + 1..self.pos + close];
                if !inner.is_empty() && inner.iter().all(|c| c.is_alphabetic() || *c == '\'') {
                    self.pos += close + 1;
                }
            }
        }
        self.s[start..self.pos].iter().collect()
    }
}

fn single_atom(label: &str) -> Option<String> {
    let chars: Vec<char> = label.chars().collect();
    if !chars.first()?.is_alphabetic() {
        return None;
    }
    let empty = Atoms::new();
    let mut p = Parser { s: &chars, pos: 0, atoms: &empty };
    let name = p.atom_name();
    (p.pos == chars.len()).then_some(name)
}

fn evaluate(label: &str, atoms: &Atoms) -> Result<i128, String> {
    let chars: Vec<char> = label.chars().collect();
    let mut p = Parser { s: &chars, pos: 0, atoms };
    let v = p.expr()?;
    if p.pos != chars.len() {
        return Err(format!("trailing input in {label}"));
    }
    Ok(v)
}

#[derive(Clone, Copy)]
struct Assignment {
    py: u64,
    iy: u64,
    gy: u64,
}

fn operand_value(o: &Operand, a: &Assignment) -> u64 {
    match o {
        Operand::Value { value, .. } => *value,
        Operand::Unknown { symbol: Symbol::PeriodY } => a.py,
        Operand::Unknown { symbol: Symbol::IndexY } => a.iy,
        Operand::Unknown { symbol: Symbol::GenusY } => a.gy,
    }
}

fn unknowns(s: &Step) -> Vec<Symbol> {
    s.operands
        .iter()
        .filter_map(|o| match o {
            Operand::Unknown { symbol } => Some(*symbol),
            _ => None,
        })
        .collect()
}

fn holds(s: &Step, a: &Assignment) -> bool {
    let x = |k: usize| operand_value(&s.operands[k], a);
    match s.kind {
        Relation::Divides | Relation::Assumption => {
            let (d, n) = (x(0), x(1));
            let r = if d == 0 { n == 0 } else { n % d == 0 };
            r != s.negated
        }
        Relation::Equals => x(0) == x(1),
        Relation::Parity => (x(0) % 2 == 0) == s.even.unwrap_or(false),
    }
}

fn shape(idx: usize, s: &Step) -> Result<(), CheckError> {
    let want = if s.kind == Relation::Parity { 1 } else { 2 };
    let bad = |reason: &str| CheckError::Malformed { step: idx, reason: reason.into() };
    if s.operands.len() != want {
        return Err(bad("wrong operand count"));
    }
    if s.kind == Relation::Parity && s.even.is_none() {
        return Err(bad("parity step without a parity"));
    }
    if s.kind == Relation::Assumption && s.role != Role::Premise {
        return Err(bad("assumption used as a derived step"));
    }
    let u = unknowns(s);
    if u.contains(&Symbol::GenusY) && u.iter().any(|&x| x != Symbol::GenusY) {
        return Err(bad("genus mixed with period or index"));
    }
    Ok(())
}

/// Check every step of `trace` and confirm that the premises force the
/// stated conclusion.
pub fn check_trace(trace: &DerivationTrace) -> Result<CheckReport, CheckError> {
    let mut atoms = Atoms::new();
    for s in &trace.steps {
        for o in &s.operands {
            if let Operand::Value { label, value } = o {
                if let Some(name) = single_atom(label) {
                    match atoms.get(&name) {
                        Some(&prev) if prev != *value => {
                            return Err(CheckError::AtomConflict { atom: name, first: prev, second: *value });
                        }
                        _ => {
                            atoms.insert(name, *value);
                        }
                    }
                }
            }
        }
    }
    let t = trace.triple;
    for (name, want) in [("g", t.g), ("P", t.p), ("I", t.i)] {
        if let Some(&got) = atoms.get(name) {
            if got != want {
                return Err(CheckError::AtomConflict { atom: name.into(), first: want, second: got });
            }
        }
        atoms.insert(name.into(), want);
    }

    let mut max_value = 1u64;
    for (idx, s) in trace.steps.iter().enumerate() {
        shape(idx, s)?;
        for o in &s.operands {
            if let Operand::Value { label, value } = o {
                let computed =
                    evaluate(label, &atoms).map_err(|reason| CheckError::Malformed { step: idx, reason })?;
                if computed != *value as i128 {
                    return Err(CheckError::ValueMismatch { step: idx, label: label.clone(), stated: *value, computed });
                }
                max_value = max_value.max(*value);
            }
        }
    }

    let dummy = Assignment { py: 0, iy: 0, gy: 0 };
    for (idx, s) in trace.steps.iter().enumerate() {
        if unknowns(s).is_empty() && !holds(s, &dummy) {
            return Err(CheckError::StepFails { step: idx, claim: s.claim.clone() });
        }
    }

    // recover the unknowns from the premises only
    let bound = 2 * max_value + 2;
    let premises: Vec<&Step> = trace
        .steps
        .iter()
        .filter(|s| s.role == Role::Premise && !unknowns(s).is_empty())
        .collect();
    let (pi_steps, g_steps): (Vec<&Step>, Vec<&Step>) =
        premises.into_iter().partition(|s| !unknowns(s).contains(&Symbol::GenusY));
    let mut pairs = Vec::new();
    for py in 1..=bound {
        for iy in 1..=bound {
            let a = Assignment { py, iy, gy: 0 };
            if pi_steps.iter().all(|s| holds(s, &a)) {
                pairs.push((py, iy));
            }
        }
    }
    let genera: Vec<u64> = (1..=bound)
        .filter(|&gy| g_steps.iter().all(|s| holds(s, &Assignment { py: 0, iy: 0, gy })))
        .collect();
    let solutions: Vec<(u64, u64, u64)> = pairs
        .iter()
        .flat_map(|&(py, iy)| genera.iter().map(move |&gy| (py, iy, gy)))
        .collect();
    if solutions.len() != 1 {
        return Err(CheckError::NotUnique(solutions.len()));
    }
    let c = trace.conclusion;
    let stated = (c.period, c.index, c.genus);
    if solutions[0] != stated {
        return Err(CheckError::ConclusionMismatch { stated, expected: solutions[0] });
    }
    if stated != (t.p, t.i, t.g) {
        return Err(CheckError::ConclusionMismatch { stated, expected: (t.p, t.i, t.g) });
    }
    let at = Assignment { py: c.period, iy: c.index, gy: c.genus };
    for (idx, s) in trace.steps.iter().enumerate() {
        if !holds(s, &at) {
            return Err(CheckError::StepFails { step: idx, claim: s.claim.clone() });
        }
    }

    for r in &trace.records {
        let expected = match r.label.as_str() {
            "X" => atoms.get("P(X)").zip(atoms.get("I(X)")).map(|(a, b)| (*a, *b)),
            "Y'" => atoms.get("P(Y')").zip(atoms.get("I(Y')")).map(|(a, b)| (*a, *b)),
            "Y" => Some((c.period, c.index)),
            _ => None,
        };
        let divides = r.period != 0 && r.index % r.period == 0;
        if expected != Some((r.period, r.index)) || !divides || (r.label == "Y" && r.genus != c.genus) {
            return Err(CheckError::RecordMismatch(r.label.clone()));
        }
    }

    Ok(CheckReport {
        steps_checked: trace.steps.len(),
        search_bound: bound,
        solutions,
        assumptions: trace.hypotheses(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_evaluate() {
        let atoms: Atoms = [("g", 7), ("I^", 3), ("P(X)", 3), ("P(Y')", 2)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert_eq!(evaluate("(g-1)/I^", &atoms), Ok(2));
        assert_eq!(evaluate("2·P(X)·P(Y')", &atoms), Ok(12));
        assert!(evaluate("g/I^", &atoms).is_err());
        assert_eq!(single_atom("P(Y')").as_deref(), Some("P(Y')"));
        assert_eq!(single_atom("2·P(X)"), None);
    }
}
