use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::logic::{check_acyclic, Atom, GroundProgram, LogicError};
use crate::lp::{Constraint, LinearProgram, Relation};
use crate::rational::Rational;
use crate::theory::{ChoiceSpace, Query, Theory};

use super::formula::{BooleanFormula, Cnf};
use super::PsatError;

/// Default ceiling on models enumerated by [`psat_decide`].
pub const DEFAULT_MODEL_CAP: usize = 1 << 20;

/// Clark completion of an acyclic ground program: every head atom is
/// equivalent to the disjunction of its clause bodies.
///
/// Atoms heading no clause are left unconstrained; see
/// [`completion_formula_closed`] to force them false.
pub fn completion_formula(gp: &GroundProgram) -> Result<BooleanFormula, LogicError> {
    completion_formula_closed(gp, &BTreeSet::new())
}

/// Clark completion that also asserts `~a` for every atom in `closed` that
/// heads no clause.
pub fn completion_formula_closed(
    gp: &GroundProgram,
    closed: &BTreeSet<Atom>,
) -> Result<BooleanFormula, LogicError> {
    check_acyclic(gp)?;
    let by_head = gp.rules_by_head();
    let mut parts = Vec::new();
    for (head, clauses) in &by_head {
        let bodies = clauses
            .iter()
            .map(|c| BooleanFormula::And(c.body.iter().map(BooleanFormula::literal).collect()))
            .collect();
        parts.push(BooleanFormula::iff(
            BooleanFormula::var((*head).clone()),
            BooleanFormula::Or(bodies),
        ));
    }
    for a in closed {
        if !by_head.contains_key(a) {
            parts.push(BooleanFormula::var(a.clone()).negate());
        }
    }
    Ok(BooleanFormula::And(parts))
}

/// Conjunction over the alternatives of "exactly one atom of the
/// alternative holds".
pub fn choice_formula(space: &ChoiceSpace) -> BooleanFormula {
    let parts: Vec<BooleanFormula> = space
        .alternatives()
        .iter()
        .map(|c| {
            let vars: Vec<BooleanFormula> =
                c.atoms().iter().cloned().map(BooleanFormula::var).collect();
            if vars.len() == 1 {
                vars.into_iter().next().expect("one operand")
            } else {
                BooleanFormula::ExactlyOne(vars)
            }
        })
        .collect();
    if parts.len() == 1 {
        parts.into_iter().next().expect("one alternative")
    } else {
        BooleanFormula::And(parts)
    }
}

/// One probability assessment `P(formula) = prob`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub formula: BooleanFormula,
    pub prob: Rational,
}

/// A set of assessments over Boolean formulas.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PsatInstance {
    pub assessments: Vec<Assessment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsatVerdict {
    Sat,
    Unsat,
}

impl PsatVerdict {
    pub fn is_sat(self) -> bool {
        self == PsatVerdict::Sat
    }
}

impl PsatInstance {
    pub fn new(assessments: Vec<Assessment>) -> Self {
        PsatInstance { assessments }
    }

    pub fn push(&mut self, formula: BooleanFormula, prob: Rational) {
        self.assessments.push(Assessment { formula, prob });
    }

    pub fn len(&self) -> usize {
        self.assessments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assessments.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<Atom> {
        self.assessments
            .iter()
            .flat_map(|a| a.formula.variables())
            .collect()
    }

    /// Conjunction of the formulas asserted with probability one.
    pub fn hard_formula(&self) -> BooleanFormula {
        BooleanFormula::And(
            self.assessments
                .iter()
                .filter(|a| a.prob.is_one())
                .map(|a| a.formula.clone())
                .collect(),
        )
    }

    /// One line per assessment, `<prob> <formula in CNF>`.
    pub fn to_export_string(&self) -> Result<String, PsatError> {
        let mut out = String::new();
        for a in &self.assessments {
            writeln!(out, "{} {}", a.prob, a.formula.to_cnf()?).expect("write to string");
        }
        Ok(out)
    }

    /// DIMACS dump of the probability-one part, numbered over all variables
    /// of the instance.
    pub fn hard_dimacs(&self) -> Result<String, PsatError> {
        Ok(self.hard_formula().to_cnf()?.to_dimacs(&self.variables()))
    }

    pub fn hard_cnf(&self) -> Result<Cnf, PsatError> {
        self.hard_formula().to_cnf()
    }
}

/// Probabilistic satisfiability instance of a single-space theory:
///
/// ```text
/// P(phi_C & phi_P) = 1,   P(a) = mu(a) for every atomic choice a,   P(/\ Q) = alpha
/// ```
///
/// `phi_P` is the completion of the ground program, closed over every atom
/// that is neither an atomic choice nor a clause head.
pub fn build_psat_instance(
    theory: &Theory,
    query: &Query,
    alpha: &Rational,
) -> Result<PsatInstance, PsatError> {
    if theory.spaces().len() != 1 {
        return Err(PsatError::NotSingleSpace {
            spaces: theory.spaces().len(),
        });
    }
    if alpha.is_negative() || *alpha > Rational::one() {
        return Err(PsatError::ProbabilityOutOfRange(alpha.clone()));
    }
    theory.ensure_valid()?;
    theory.check_query(query)?;
    let choices = theory.atomic_choices();
    let mut closed: BTreeSet<Atom> = theory.herbrand_base();
    closed.extend(query.literals().iter().map(|l| l.atom.clone()));
    closed.retain(|a| !choices.contains(a));
    let hard = BooleanFormula::And(vec![
        choice_formula(&theory.spaces()[0]),
        completion_formula_closed(&theory.ground_program(), &closed)?,
    ]);
    let mut inst = PsatInstance::default();
    inst.push(hard, Rational::one());
    for a in &choices {
        let m = theory
            .mass(a)
            .expect("validated theory has every mass")
            .clone();
        inst.push(BooleanFormula::var(a.clone()), m);
    }
    inst.push(
        BooleanFormula::And(
            query
                .literals()
                .iter()
                .map(BooleanFormula::literal)
                .collect(),
        ),
        alpha.clone(),
    );
    Ok(inst)
}

pub fn psat_decide(inst: &PsatInstance) -> Result<PsatVerdict, PsatError> {
    psat_decide_with_cap(inst, DEFAULT_MODEL_CAP)
}

pub fn psat_decide_with_cap(inst: &PsatInstance, cap: usize) -> Result<PsatVerdict, PsatError> {
    Ok(if psat_solve_with_cap(inst, cap)?.is_some() {
        PsatVerdict::Sat
    } else {
        PsatVerdict::Unsat
    })
}

/// Probability mass on one truth assignment.
pub type WeightedModel = (BTreeMap<Atom, bool>, Rational);

/// A distribution over models of the probability-one formulas matching
/// every assessment, if one exists.
pub fn psat_solve(inst: &PsatInstance) -> Result<Option<Vec<WeightedModel>>, PsatError> {
    psat_solve_with_cap(inst, DEFAULT_MODEL_CAP)
}

pub fn psat_solve_with_cap(
    inst: &PsatInstance,
    cap: usize,
) -> Result<Option<Vec<WeightedModel>>, PsatError> {
    for a in &inst.assessments {
        if a.prob.is_negative() || a.prob > Rational::one() {
            return Err(PsatError::ProbabilityOutOfRange(a.prob.clone()));
        }
    }
    let vars: Vec<Atom> = inst.variables().into_iter().collect();
    let models = hard_models(&inst.hard_formula(), &vars, cap)?;
    if models.is_empty() {
        return Ok(None);
    }
    let n = models.len();
    let mut lp = LinearProgram::new(n);
    let row = |f: &BooleanFormula, rhs: Rational| {
        let coeffs = models
            .iter()
            .map(|m| {
                if f.eval(&|a: &Atom| m[a]) {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        Constraint::new(coeffs, Relation::Eq, rhs)
    };
    lp.add(Constraint::new(
        vec![Rational::one(); n],
        Relation::Eq,
        Rational::one(),
    ))
    .expect("row has one coefficient per model");
    for a in inst.assessments.iter().filter(|a| !a.prob.is_one()) {
        lp.add(row(&a.formula, a.prob.clone()))
            .expect("row has one coefficient per model");
    }
    match lp.feasible_point() {
        Ok(x) => Ok(Some(
            models
                .into_iter()
                .zip(x)
                .filter(|(_, p)| !p.is_zero())
                .collect(),
        )),
        Err(_) => Ok(None),
    }
}

/// Models of `hard` over `vars`, by backtracking with three-valued pruning.
fn hard_models(
    hard: &BooleanFormula,
    vars: &[Atom],
    cap: usize,
) -> Result<Vec<BTreeMap<Atom, bool>>, PsatError> {
    let mut out = Vec::new();
    let mut partial: HashMap<Atom, bool> = HashMap::new();
    search(hard, vars, 0, &mut partial, &mut out, cap)?;
    Ok(out)
}

fn search(
    hard: &BooleanFormula,
    vars: &[Atom],
    depth: usize,
    partial: &mut HashMap<Atom, bool>,
    out: &mut Vec<BTreeMap<Atom, bool>>,
    cap: usize,
) -> Result<(), PsatError> {
    match hard.eval_partial(&|a: &Atom| partial.get(a).copied()) {
        Some(false) => return Ok(()),
        Some(true) if depth == vars.len() => {
            if out.len() == cap {
                return Err(PsatError::TooManyModels { cap });
            }
            out.push(partial.iter().map(|(a, &b)| (a.clone(), b)).collect());
            return Ok(());
        }
        _ => {}
    }
    let v = &vars[depth];
    for value in [true, false] {
        partial.insert(v.clone(), value);
        search(hard, vars, depth + 1, partial, out, cap)?;
    }
    partial.remove(v);
    Ok(())
}

/// Models of `phi_C & phi_P` for a single-space theory, over the instance
/// variables.
pub fn theory_models(theory: &Theory) -> Result<Vec<BTreeMap<Atom, bool>>, PsatError> {
    let inst = build_psat_instance(theory, &Query::default(), &Rational::one())?;
    let vars: Vec<Atom> = inst.variables().into_iter().collect();
    hard_models(&inst.assessments[0].formula, &vars, DEFAULT_MODEL_CAP)
}
