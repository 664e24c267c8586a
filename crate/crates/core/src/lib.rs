//! Credal choice logic.
//!
//! A credal choice theory is an acyclic logic program together with a family
//! of *choice spaces*. Each choice space groups alternatives (sets of ground
//! atoms with a probability on each atom) whose selections are not assumed
//! independent of each other; different spaces are strongly independent.
//! The theory therefore denotes a closed convex set of joint distributions
//! over possible worlds, and a query has a lower and an upper success
//! probability instead of a single number.
//!
//! The crate computes those bounds exactly with rational arithmetic:
//!
//! * [`inference::credal_bounds_single_space`] solves two linear programs,
//! * [`inference::credal_bounds_strong_extension`] evaluates the query at
//!   every product of per-space extreme points,
//! * [`inference::outer_bound`] gives the cheap factorized outer bound,
//! * [`psat::bisect_bounds`] brackets the interval through probabilistic
//!   satisfiability decisions.
//!
//! [`ranking`] applies the machinery to object ranking from rank marginals.
//!
//! ```
//! use ccl::{inference, theory::parse_theory};
//!
//! let file = parse_theory(
//!     "p :- c.\n p :- r.\n h :- \\+ p, nw.\n
//!      choicespace { alternative { r: 0.1, nr: 0.9 } alternative { c: 0.5, nc: 0.5 } }
//!      choicespace { alternative { w: 0.2, nw: 0.8 } }
//!      query h.",
//! ).unwrap();
//! let bounds = inference::credal_bounds_strong_extension(&file.theory, &file.queries[0]).unwrap();
//! assert_eq!(bounds.lower, ccl::rational::ratio(8, 25));
//! assert_eq!(bounds.upper, ccl::rational::ratio(2, 5));
//! ```

pub mod inference;
pub mod logic;
pub mod lp;
pub mod polytope;
pub mod psat;
pub mod ranking;
pub mod rational;
pub mod theory;
pub mod worlds;

pub use rational::Rational;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/logic-programs.md")]
    mod logic_programs {}
    #[doc = include_str!("../../../book/src/theories.md")]
    mod theories {}
    #[doc = include_str!("../../../book/src/worlds.md")]
    mod worlds {}
    #[doc = include_str!("../../../book/src/linear-programming.md")]
    mod linear_programming {}
    #[doc = include_str!("../../../book/src/credal-inference.md")]
    mod credal_inference {}
    #[doc = include_str!("../../../book/src/psat.md")]
    mod psat {}
    #[doc = include_str!("../../../book/src/ranking.md")]
    mod ranking {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
