//! Marginal credal sets and their extreme points.
//!
//! For a choice space, the marginal set holds every mass function over the
//! space's world classes (one class per coherent partial choice) whose
//! induced atom probabilities agree with the theory:
//!
//! ```text
//! x >= 0,   sum_c x_c = 1,   sum_{c : a in image(c)} x_c = mu(a)  for each atomic choice a
//! ```

use std::collections::{BTreeSet, HashSet};

use num_traits::{One, Signed, Zero};

use crate::logic::Atom;
use crate::lp::{Constraint, LinearProgram, LpError, Relation};
use crate::rational::Rational;
use crate::theory::Theory;
use crate::worlds::partial_choices;

/// Default ceiling on search nodes visited by [`MarginalPolytope::vertices`].
pub const DEFAULT_VERTEX_SEARCH_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("vertex enumeration exceeded {cap} search nodes")]
    CapExceeded { cap: usize },
    #[error("choice space {space} admits no mass function agreeing with the marginals")]
    Empty { space: usize },
}

/// Non-negative weights summing to one, indexed like the classes (or worlds)
/// they are defined on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MassFunction(pub Vec<Rational>);

impl MassFunction {
    pub fn weights(&self) -> &[Rational] {
        &self.0
    }

    pub fn total(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.total().is_one() && self.0.iter().all(|w| !w.is_negative())
    }
}

/// The marginal credal set of one choice space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalPolytope {
    pub space_index: usize,
    /// Image of each class, in canonical partial-choice order.
    pub classes: Vec<BTreeSet<Atom>>,
    /// Atomic choices of the space with their masses.
    pub atoms: Vec<(Atom, Rational)>,
}

impl MarginalPolytope {
    /// Polytope of space `space_index` of a validated theory.
    pub fn of_space(theory: &Theory, space_index: usize) -> Self {
        let space = &theory.spaces()[space_index];
        let classes = partial_choices(space_index, space)
            .into_iter()
            .map(|p| p.image)
            .collect();
        let atoms = space
            .atomic_choices()
            .into_iter()
            .map(|a| {
                let m = theory.mass(&a).cloned().unwrap_or_else(Rational::zero);
                (a, m)
            })
            .collect();
        MarginalPolytope {
            space_index,
            classes,
            atoms,
        }
    }

    pub fn dimension_hint(&self) -> usize {
        self.classes.len()
    }

    /// Normalization row followed by one agreement row per atomic choice.
    pub fn equalities(&self) -> Vec<Constraint> {
        let n = self.classes.len();
        let mut rows = vec![Constraint::new(
            vec![Rational::one(); n],
            Relation::Eq,
            Rational::one(),
        )];
        for (a, m) in &self.atoms {
            let coeffs = self
                .classes
                .iter()
                .map(|img| {
                    if img.contains(a) {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            rows.push(Constraint::new(coeffs, Relation::Eq, m.clone()));
        }
        rows
    }

    pub fn linear_program(&self) -> LinearProgram {
        LinearProgram::with_constraints(self.classes.len(), self.equalities())
            .expect("rows are built with one coefficient per class")
    }

    pub fn contains(&self, x: &MassFunction) -> bool {
        self.linear_program().is_feasible_point(x.weights())
    }

    /// Smallest and largest probability class `class` can receive.
    pub fn class_range(&self, class: usize) -> Result<(Rational, Rational), PolytopeError> {
        let lp = self.linear_program();
        let mut objective = vec![Rational::zero(); self.classes.len()];
        objective[class] = Rational::one();
        let empty = |_: LpError| PolytopeError::Empty {
            space: self.space_index + 1,
        };
        let lo = lp.minimize(&objective).map_err(empty)?.value;
        let hi = lp.maximize(&objective).map_err(empty)?.value;
        Ok((lo, hi))
    }

    pub fn vertices(&self) -> Result<Vec<MassFunction>, PolytopeError> {
        self.vertices_with_cap(DEFAULT_VERTEX_SEARCH_CAP)
    }

    /// All extreme points, in lexicographic order of their support.
    ///
    /// A feasible point is extreme iff the columns on its support are
    /// linearly independent, so the search walks independent column sets in
    /// increasing index order, keeping `[A | b]` in Gauss-Jordan form with
    /// respect to the chosen columns. A set is a vertex support when `b` lies
    /// in its span with strictly positive coefficients. Each vertex has a
    /// unique support and is reported once.
    pub fn vertices_with_cap(&self, cap: usize) -> Result<Vec<MassFunction>, PolytopeError> {
        let rows = self.equalities();
        let n = self.classes.len();
        let m = rows.len();
        let matrix: Vec<Vec<Rational>> = rows
            .iter()
            .map(|c| {
                let mut r = c.coeffs.clone();
                r.push(c.rhs.clone());
                r
            })
            .collect();
        let mut search = VertexSearch {
            n,
            m,
            cap,
            visited: 0,
            found: Vec::new(),
        };
        let state = Echelon {
            matrix,
            pivots: Vec::new(),
            pivot_rows: vec![false; m],
        };
        search.visit(&state, 0)?;
        if search.found.is_empty() {
            return Err(PolytopeError::Empty {
                space: self.space_index + 1,
            });
        }
        let mut seen = HashSet::new();
        search.found.retain(|v| seen.insert(v.clone()));
        Ok(search.found)
    }
}

#[derive(Clone)]
struct Echelon {
    matrix: Vec<Vec<Rational>>,
    /// (column, row) of every pivot so far.
    pivots: Vec<(usize, usize)>,
    pivot_rows: Vec<bool>,
}

struct VertexSearch {
    n: usize,
    m: usize,
    cap: usize,
    visited: usize,
    found: Vec<MassFunction>,
}

impl VertexSearch {
    fn visit(&mut self, state: &Echelon, next: usize) -> Result<(), PolytopeError> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(PolytopeError::CapExceeded { cap: self.cap });
        }
        let b = self.n;
        let in_span = (0..self.m).all(|r| state.pivot_rows[r] || state.matrix[r][b].is_zero());
        if in_span && !state.pivots.is_empty() {
            if state
                .pivots
                .iter()
                .all(|&(_, r)| state.matrix[r][b].is_positive())
            {
                let mut x = vec![Rational::zero(); self.n];
                for &(c, r) in &state.pivots {
                    x[c] = state.matrix[r][b].clone();
                }
                self.found.push(MassFunction(x));
            }
            // b already spanned: adding columns keeps the solution but makes
            // the new column's coefficient zero, so no larger support works.
            return Ok(());
        }
        for col in next..self.n {
            let Some(row) =
                (0..self.m).find(|&r| !state.pivot_rows[r] && !state.matrix[r][col].is_zero())
            else {
                continue; // dependent on the chosen columns
            };
            let mut child = state.clone();
            pivot(&mut child.matrix, row, col);
            child.pivots.push((col, row));
            child.pivot_rows[row] = true;
            self.visit(&child, col + 1)?;
        }
        Ok(())
    }
}

fn pivot(matrix: &mut [Vec<Rational>], r: usize, c: usize) {
    let p = matrix[r][c].clone();
    for v in matrix[r].iter_mut() {
        if !v.is_zero() {
            *v /= &p;
        }
    }
    let pivot_row = matrix[r].clone();
    for (i, row) in matrix.iter_mut().enumerate() {
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
}
