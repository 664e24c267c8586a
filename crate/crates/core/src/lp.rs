//! Exact two-phase simplex over rationals.
//!
//! All variables are non-negative. Pivoting uses Bland's rule (smallest
//! eligible entering index, smallest basic index among tied leaving rows), so
//! the method terminates on degenerate problems, which marginal polytopes
//! usually are.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `coeffs · x (relation) rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Self {
        Constraint {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// Optimal value and a basic optimal solution attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub point: Vec<Rational>,
}

/// A feasible region `{x >= 0 : constraints}` over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraints(
        num_vars: usize,
        constraints: Vec<Constraint>,
    ) -> Result<Self, LpError> {
        let mut lp = LinearProgram::new(num_vars);
        for c in constraints {
            lp.add(c)?;
        }
        Ok(lp)
    }

    pub fn add(&mut self, c: Constraint) -> Result<(), LpError> {
        if c.coeffs.len() != self.num_vars {
            return Err(LpError::DimensionMismatch {
                row: self.constraints.len(),
                expected: self.num_vars,
                found: c.coeffs.len(),
            });
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
    }

    /// Basic feasible point found by phase one.
    pub fn feasible_point(&self) -> Result<Vec<Rational>, LpError> {
        let tab = Tableau::phase_one(self)?;
        Ok(tab.primal(self.num_vars))
    }

    pub fn optimize(&self, sense: Sense, objective: &[Rational]) -> Result<LpSolution, LpError> {
        if objective.len() != self.num_vars {
            return Err(LpError::DimensionMismatch {
                row: usize::MAX,
                expected: self.num_vars,
                found: objective.len(),
            });
        }
        let mut tab = Tableau::phase_one(self)?;
        let mut cost = vec![Rational::zero(); tab.cols];
        for (j, c) in objective.iter().enumerate() {
            cost[j] = match sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
        }
        tab.run(&cost)?;
        let point = tab.primal(self.num_vars);
        let value = objective.iter().zip(&point).map(|(c, x)| c * x).sum();
        Ok(LpSolution { value, point })
    }

    pub fn minimize(&self, objective: &[Rational]) -> Result<LpSolution, LpError> {
        self.optimize(Sense::Minimize, objective)
    }

    pub fn maximize(&self, objective: &[Rational]) -> Result<LpSolution, LpError> {
        self.optimize(Sense::Maximize, objective)
    }
}

/// Solves `sense objective·x` subject to `constraints` and `x >= 0`.
pub fn solve_lp(
    sense: Sense,
    objective: &[Rational],
    constraints: &[Constraint],
) -> Result<LpSolution, LpError> {
    LinearProgram::with_constraints(objective.len(), constraints.to_vec())?
        .optimize(sense, objective)
}

struct Tableau {
    /// rows × (cols + 1); the last entry of each row is its right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
    /// Columns that may enter the basis.
    allowed: Vec<bool>,
}

impl Tableau {
    /// Builds the standard-form tableau and drives it to a feasible basis
    /// without artificial variables.
    fn phase_one(lp: &LinearProgram) -> Result<Self, LpError> {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (
                        c.coeffs.iter().map(|v| -v).collect(),
                        flipped,
                        -c.rhs.clone(),
                    )
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let slacks = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let artificials = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let cols = n + slacks + artificials;
        let first_artificial = n + slacks;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (n, first_artificial);
        for (coeffs, rel, rhs) in normalized {
            let mut row = vec![Rational::zero(); cols + 1];
            for (j, v) in coeffs.into_iter().enumerate() {
                row[j] = v;
            }
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = Rational::from_integer(1.into());
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = Rational::from_integer((-1).into());
                    row[a] = Rational::from_integer(1.into());
                    basis.push(a);
                    s += 1;
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Rational::from_integer(1.into());
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        let mut tab = Tableau {
            rows,
            basis,
            cols,
            allowed: vec![true; cols],
        };
        if artificials == 0 {
            return Ok(tab);
        }
        let mut cost = vec![Rational::zero(); cols];
        for c in cost.iter_mut().skip(first_artificial) {
            *c = Rational::from_integer(1.into());
        }
        tab.run(&cost).expect("phase one is bounded below by zero");
        let infeasibility: Rational = tab
            .basis
            .iter()
            .zip(&tab.rows)
            .filter(|(b, _)| **b >= first_artificial)
            .map(|(_, r)| r[cols].clone())
            .sum();
        if !infeasibility.is_zero() {
            return Err(LpError::Infeasible);
        }
        // Pivot zero-valued artificials out of the basis; rows where that is
        // impossible are linear combinations of the others.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= first_artificial {
                if let Some(j) = (0..first_artificial).find(|&j| !tab.rows[i][j].is_zero()) {
                    tab.pivot(i, j);
                } else {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        for allowed in tab.allowed.iter_mut().skip(first_artificial) {
            *allowed = false;
        }
        Ok(tab)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` from the current feasible basis.
    fn run(&mut self, cost: &[Rational]) -> Result<(), LpError> {
        loop {
            let entering = (0..self.cols).find(|&j| {
                if !self.allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &b) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[b].is_zero() {
                        reduced -= &cost[b] * &row[j];
                    }
                }
                reduced.is_negative()
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[j];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Err(LpError::Unbounded);
            };
            self.pivot(r, j);
        }
    }

    fn primal(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < n {
                x[b] = row[self.cols].clone();
            }
        }
        x
    }
}
