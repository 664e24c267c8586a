use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::logic::{Atom, Literal};

use super::PsatError;

/// Default ceiling on clauses produced by [`BooleanFormula::to_cnf`].
pub const DEFAULT_CNF_CAP: usize = 1 << 16;

/// Propositional formula over ground atoms.
///
/// `ExactlyOne` is the XOR of a choice alternative: exactly one operand holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BooleanFormula {
    Const(bool),
    Var(Atom),
    Not(Box<BooleanFormula>),
    And(Vec<BooleanFormula>),
    Or(Vec<BooleanFormula>),
    ExactlyOne(Vec<BooleanFormula>),
    Iff(Box<BooleanFormula>, Box<BooleanFormula>),
}

impl BooleanFormula {
    pub fn var(atom: Atom) -> Self {
        BooleanFormula::Var(atom)
    }

    pub fn literal(lit: &Literal) -> Self {
        let v = BooleanFormula::Var(lit.atom.clone());
        if lit.positive {
            v
        } else {
            v.negate()
        }
    }

    pub fn negate(self) -> Self {
        BooleanFormula::Not(Box::new(self))
    }

    pub fn iff(a: BooleanFormula, b: BooleanFormula) -> Self {
        BooleanFormula::Iff(Box::new(a), Box::new(b))
    }

    pub fn variables(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Atom>) {
        match self {
            BooleanFormula::Const(_) => {}
            BooleanFormula::Var(a) => {
                out.insert(a.clone());
            }
            BooleanFormula::Not(x) => x.collect_variables(out),
            BooleanFormula::And(xs) | BooleanFormula::Or(xs) | BooleanFormula::ExactlyOne(xs) => {
                xs.iter().for_each(|x| x.collect_variables(out))
            }
            BooleanFormula::Iff(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    /// Truth value under a total assignment.
    pub fn eval(&self, value: &impl Fn(&Atom) -> bool) -> bool {
        match self {
            BooleanFormula::Const(b) => *b,
            BooleanFormula::Var(a) => value(a),
            BooleanFormula::Not(x) => !x.eval(value),
            BooleanFormula::And(xs) => xs.iter().all(|x| x.eval(value)),
            BooleanFormula::Or(xs) => xs.iter().any(|x| x.eval(value)),
            BooleanFormula::ExactlyOne(xs) => xs.iter().filter(|x| x.eval(value)).count() == 1,
            BooleanFormula::Iff(a, b) => a.eval(value) == b.eval(value),
        }
    }

    /// Three-valued evaluation: `None` when unassigned variables can still
    /// change the outcome.
    pub fn eval_partial(&self, value: &impl Fn(&Atom) -> Option<bool>) -> Option<bool> {
        match self {
            BooleanFormula::Const(b) => Some(*b),
            BooleanFormula::Var(a) => value(a),
            BooleanFormula::Not(x) => x.eval_partial(value).map(|b| !b),
            BooleanFormula::And(xs) => {
                let mut unknown = false;
                for x in xs {
                    match x.eval_partial(value) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            BooleanFormula::Or(xs) => {
                let mut unknown = false;
                for x in xs {
                    match x.eval_partial(value) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            BooleanFormula::ExactlyOne(xs) => {
                let mut trues = 0;
                let mut unknown = 0;
                for x in xs {
                    match x.eval_partial(value) {
                        Some(true) => trues += 1,
                        None => unknown += 1,
                        Some(false) => {}
                    }
                }
                if trues > 1 {
                    Some(false)
                } else if unknown == 0 {
                    Some(trues == 1)
                } else {
                    None
                }
            }
            BooleanFormula::Iff(a, b) => Some(a.eval_partial(value)? == b.eval_partial(value)?),
        }
    }

    pub fn to_cnf(&self) -> Result<Cnf, PsatError> {
        self.to_cnf_with_cap(DEFAULT_CNF_CAP)
    }

    /// Equivalent CNF over the same variables, by negation pushing and
    /// distribution. `ExactlyOne` becomes one disjunction plus pairwise
    /// negated conjunctions.
    pub fn to_cnf_with_cap(&self, cap: usize) -> Result<Cnf, PsatError> {
        let clauses = cnf(self, false, cap)?;
        Ok(Cnf { clauses })
    }
}

type Clause = Vec<Literal>;

fn cnf(f: &BooleanFormula, negated: bool, cap: usize) -> Result<Vec<Clause>, PsatError> {
    use BooleanFormula::*;
    match f {
        Const(b) => Ok(if *b != negated { vec![] } else { vec![vec![]] }),
        Var(a) => Ok(vec![vec![Literal {
            atom: a.clone(),
            positive: !negated,
        }]]),
        Not(x) => cnf(x, !negated, cap),
        And(xs) if !negated => conjoin(xs.iter().map(|x| cnf(x, false, cap)), cap),
        Or(xs) if negated => conjoin(xs.iter().map(|x| cnf(x, true, cap)), cap),
        And(xs) | Or(xs) => {
            let mut acc: Vec<Clause> = vec![vec![]];
            for x in xs {
                let part = cnf(x, negated, cap)?;
                acc = distribute(&acc, &part, cap)?;
            }
            Ok(acc)
        }
        ExactlyOne(xs) => {
            let pairs = || (0..xs.len()).flat_map(move |i| (i + 1..xs.len()).map(move |j| (i, j)));
            let expanded = if negated {
                // none holds, or two hold
                let mut options = vec![And(xs.iter().map(|x| x.clone().negate()).collect())];
                options.extend(pairs().map(|(i, j)| And(vec![xs[i].clone(), xs[j].clone()])));
                Or(options)
            } else {
                let mut parts = vec![Or(xs.clone())];
                parts.extend(
                    pairs().map(|(i, j)| Or(vec![xs[i].clone().negate(), xs[j].clone().negate()])),
                );
                And(parts)
            };
            cnf(&expanded, false, cap)
        }
        Iff(a, b) => {
            let (a, b) = ((**a).clone(), (**b).clone());
            let expanded = if negated {
                And(vec![
                    Or(vec![a.clone(), b.clone()]),
                    Or(vec![a.negate(), b.negate()]),
                ])
            } else {
                And(vec![
                    Or(vec![a.clone().negate(), b.clone()]),
                    Or(vec![a, b.negate()]),
                ])
            };
            cnf(&expanded, false, cap)
        }
    }
}

fn conjoin(
    parts: impl Iterator<Item = Result<Vec<Clause>, PsatError>>,
    cap: usize,
) -> Result<Vec<Clause>, PsatError> {
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
        if out.len() > cap {
            return Err(PsatError::CnfTooLarge { cap });
        }
    }
    Ok(out)
}

/// Clauses of `(/\ left) \/ (/\ right)`, dropping tautologies.
fn distribute(left: &[Clause], right: &[Clause], cap: usize) -> Result<Vec<Clause>, PsatError> {
    let mut out = Vec::new();
    for l in left {
        'pair: for r in right {
            let mut merged = l.clone();
            for lit in r {
                if merged
                    .iter()
                    .any(|m| m.atom == lit.atom && m.positive != lit.positive)
                {
                    continue 'pair;
                }
                if !merged.contains(lit) {
                    merged.push(lit.clone());
                }
            }
            out.push(merged);
            if out.len() > cap {
                return Err(PsatError::CnfTooLarge { cap });
            }
        }
    }
    Ok(out)
}

impl fmt::Display for BooleanFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, xs: &[BooleanFormula], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (k, x) in xs.iter().enumerate() {
                if k > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            BooleanFormula::Const(true) => f.write_str("true"),
            BooleanFormula::Const(false) => f.write_str("false"),
            BooleanFormula::Var(a) => write!(f, "{a}"),
            BooleanFormula::Not(x) => write!(f, "~{x}"),
            BooleanFormula::And(xs) if xs.is_empty() => f.write_str("true"),
            BooleanFormula::Or(xs) if xs.is_empty() => f.write_str("false"),
            BooleanFormula::And(xs) if xs.len() == 1 => write!(f, "{}", xs[0]),
            BooleanFormula::Or(xs) if xs.len() == 1 => write!(f, "{}", xs[0]),
            BooleanFormula::And(xs) => join(f, xs, " & "),
            BooleanFormula::Or(xs) => join(f, xs, " | "),
            BooleanFormula::ExactlyOne(xs) => {
                f.write_str("one_of")?;
                join(f, xs, ", ")
            }
            BooleanFormula::Iff(a, b) => write!(f, "({a} <-> {b})"),
        }
    }
}

/// Conjunction of clauses, each a disjunction of literals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    pub clauses: Vec<Vec<Literal>>,
}

impl Cnf {
    pub fn variables(&self) -> BTreeSet<Atom> {
        self.clauses
            .iter()
            .flatten()
            .map(|l| l.atom.clone())
            .collect()
    }

    pub fn eval(&self, value: &impl Fn(&Atom) -> bool) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| value(&l.atom) == l.positive))
    }

    /// DIMACS CNF text. Variables are numbered in atom order over
    /// `variables` (which must include every atom of the clauses), and a
    /// comment line records each number's atom.
    pub fn to_dimacs(&self, variables: &BTreeSet<Atom>) -> String {
        let index: HashMap<&Atom, usize> = variables
            .iter()
            .enumerate()
            .map(|(k, a)| (a, k + 1))
            .collect();
        let mut out = String::new();
        for (a, k) in variables.iter().zip(1..) {
            out.push_str(&format!("c {k} {a}\n"));
        }
        out.push_str(&format!(
            "p cnf {} {}\n",
            variables.len(),
            self.clauses.len()
        ));
        for c in &self.clauses {
            for l in c {
                let v = index[&l.atom] as i64;
                out.push_str(&format!("{} ", if l.positive { v } else { -v }));
            }
            out.push_str("0\n");
        }
        out
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("true");
        }
        for (k, c) in self.clauses.iter().enumerate() {
            if k > 0 {
                f.write_str(" & ")?;
            }
            f.write_str("(")?;
            if c.is_empty() {
                f.write_str("false")?;
            }
            for (m, l) in c.iter().enumerate() {
                if m > 0 {
                    f.write_str(" | ")?;
                }
                if !l.positive {
                    f.write_str("~")?;
                }
                write!(f, "{}", l.atom)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Every total assignment over `vars` (first variable varies slowest),
/// keeping those where `keep` holds.
pub fn assignments_where(
    vars: &[Atom],
    keep: impl Fn(&BTreeMap<Atom, bool>) -> bool,
) -> Vec<BTreeMap<Atom, bool>> {
    let mut out = Vec::new();
    let total = 1u64 << vars.len();
    for bits in 0..total {
        let a: BTreeMap<Atom, bool> = vars
            .iter()
            .enumerate()
            .map(|(k, v)| (v.clone(), bits >> (vars.len() - 1 - k) & 1 == 0))
            .collect();
        if keep(&a) {
            out.push(a);
        }
    }
    out
}
