//! Reduction of single-space inference to probabilistic satisfiability.
//!
//! For a theory with one choice space, `alpha` lies in the interval of
//! success probabilities of `Q` exactly when the assessments
//!
//! ```text
//! P(phi_C & phi_P) = 1,   P(a) = mu(a),   P(/\ Q) = alpha
//! ```
//!
//! admit a joint distribution. Here `phi_C` states that exactly one atom of
//! each alternative holds and `phi_P` is the completion of the program.
//! Satisfiability is decided by enumerating the models of the
//! probability-one formula and solving an exact feasibility program over
//! them. [`bisect_bounds`] brackets both ends of the interval with such
//! decisions.

mod bisect;
mod formula;
mod instance;

pub use bisect::{
    bisect_bounds, bisect_bounds_traced, inner_point, Bisection, BracketState, Probe,
};
pub use formula::{assignments_where, BooleanFormula, Cnf, DEFAULT_CNF_CAP};
pub use instance::{
    build_psat_instance, choice_formula, completion_formula, completion_formula_closed,
    psat_decide, psat_decide_with_cap, psat_solve, psat_solve_with_cap, theory_models, Assessment,
    PsatInstance, PsatVerdict, WeightedModel, DEFAULT_MODEL_CAP,
};

use crate::logic::LogicError;
use crate::rational::Rational;
use crate::theory::TheoryError;
use crate::worlds::WorldError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PsatError {
    #[error("theory has {spaces} choice spaces; the reduction needs exactly one")]
    NotSingleSpace { spaces: usize },
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(Rational),
    #[error("bisection tolerance must be positive, got {0}")]
    BadEpsilon(Rational),
    #[error("clause form exceeds {cap} clauses")]
    CnfTooLarge { cap: usize },
    #[error("more than {cap} models of the probability-one formulas")]
    TooManyModels { cap: usize },
    #[error("the choice space admits no mass function agreeing with the marginals")]
    EmptyCredalSet,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    World(#[from] WorldError),
}
