use num_traits::{One, Zero};

use crate::inference::{IntervalResult, Method};
use crate::polytope::MarginalPolytope;
use crate::rational::{int, Rational};
use crate::theory::{Query, Theory};
use crate::worlds::WorldSpace;

use super::instance::{build_psat_instance, psat_decide, PsatVerdict};
use super::PsatError;

/// Query probability under one member of the credal set: a phase-one
/// feasible point of the marginal-agreement program.
pub fn inner_point(theory: &Theory, query: &Query) -> Result<Rational, PsatError> {
    if theory.spaces().len() != 1 {
        return Err(PsatError::NotSingleSpace {
            spaces: theory.spaces().len(),
        });
    }
    theory.check_query(query)?;
    let ws = WorldSpace::build(theory)?;
    let x = MarginalPolytope::of_space(theory, 0)
        .linear_program()
        .feasible_point()
        .map_err(|_| PsatError::EmptyCredalSet)?;
    Ok(ws
        .satisfying(query)?
        .into_iter()
        .map(|w| x[ws.class_of[w][0]].clone())
        .sum())
}

/// Known inner (satisfiable) and outer (unsatisfiable) probe values.
///
/// `None` for an outer value means the matching end of `[0, 1]` was itself
/// satisfiable, so that endpoint is exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketState {
    pub sat_low: Rational,
    pub sat_high: Rational,
    pub unsat_low: Option<Rational>,
    pub unsat_high: Option<Rational>,
    pub epsilon: Rational,
}

impl BracketState {
    pub fn lower_gap(&self) -> Rational {
        self.unsat_low
            .as_ref()
            .map_or_else(Rational::zero, |u| &self.sat_low - u)
    }

    pub fn upper_gap(&self) -> Rational {
        self.unsat_high
            .as_ref()
            .map_or_else(Rational::zero, |u| u - &self.sat_high)
    }

    /// Outer interval: the unsatisfiable values, or exact ends.
    pub fn outer(&self) -> (Rational, Rational) {
        (
            self.unsat_low
                .clone()
                .unwrap_or_else(|| self.sat_low.clone()),
            self.unsat_high
                .clone()
                .unwrap_or_else(|| self.sat_high.clone()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub alpha: Rational,
    pub verdict: PsatVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bisection {
    pub result: IntervalResult,
    pub state: BracketState,
    /// Every decision made, boundary probes first, then lower-side and
    /// upper-side probes.
    pub probes: Vec<Probe>,
}

impl Bisection {
    pub fn psat_calls(&self) -> usize {
        self.probes.len()
    }
}

/// Brackets the lower and upper success probability of `query` to within
/// `epsilon` by deciding probabilistic satisfiability at chosen values.
///
/// The reported interval holds the exact one, and each end is within
/// `epsilon` of the exact end.
pub fn bisect_bounds(
    theory: &Theory,
    query: &Query,
    epsilon: &Rational,
) -> Result<IntervalResult, PsatError> {
    Ok(bisect_bounds_traced(theory, query, epsilon)?.result)
}

pub fn bisect_bounds_traced(
    theory: &Theory,
    query: &Query,
    epsilon: &Rational,
) -> Result<Bisection, PsatError> {
    if *epsilon <= Rational::zero() {
        return Err(PsatError::BadEpsilon(epsilon.clone()));
    }
    let decide = |alpha: &Rational| -> Result<Probe, PsatError> {
        let inst = build_psat_instance(theory, query, alpha)?;
        Ok(Probe {
            alpha: alpha.clone(),
            verdict: psat_decide(&inst)?,
        })
    };
    let inner = inner_point(theory, query)?;
    let zero = decide(&Rational::zero())?;
    let one = decide(&Rational::one())?;
    let mut state = BracketState {
        sat_low: if zero.verdict.is_sat() {
            Rational::zero()
        } else {
            inner.clone()
        },
        sat_high: if one.verdict.is_sat() {
            Rational::one()
        } else {
            inner
        },
        unsat_low: (!zero.verdict.is_sat()).then(Rational::zero),
        unsat_high: (!one.verdict.is_sat()).then(Rational::one),
        epsilon: epsilon.clone(),
    };
    let two = int(2);
    let lower_side = |mut sat: Rational, mut unsat: Option<Rational>| -> Result<_, PsatError> {
        let mut probes = Vec::new();
        while let Some(u) = unsat.clone().filter(|u| &sat - u >= *epsilon) {
            let mid = (&u + &sat) / &two;
            let p = decide(&mid)?;
            if p.verdict.is_sat() {
                sat = mid;
            } else {
                unsat = Some(mid);
            }
            probes.push(p);
        }
        Ok((sat, unsat, probes))
    };
    let upper_side = |mut sat: Rational, mut unsat: Option<Rational>| -> Result<_, PsatError> {
        let mut probes = Vec::new();
        while let Some(u) = unsat.clone().filter(|u| u - &sat >= *epsilon) {
            let mid = (&u + &sat) / &two;
            let p = decide(&mid)?;
            if p.verdict.is_sat() {
                sat = mid;
            } else {
                unsat = Some(mid);
            }
            probes.push(p);
        }
        Ok((sat, unsat, probes))
    };
    let (low, high) = rayon::join(
        || lower_side(state.sat_low.clone(), state.unsat_low.clone()),
        || upper_side(state.sat_high.clone(), state.unsat_high.clone()),
    );
    let (sat_low, unsat_low, low_probes) = low?;
    let (sat_high, unsat_high, high_probes) = high?;
    state.sat_low = sat_low;
    state.unsat_low = unsat_low;
    state.sat_high = sat_high;
    state.unsat_high = unsat_high;
    let (lower, upper) = state.outer();
    let mut probes = vec![zero, one];
    probes.extend(low_probes);
    probes.extend(high_probes);
    Ok(Bisection {
        result: IntervalResult {
            lower,
            upper,
            method: Method::PsatBisect,
            epsilon: epsilon.clone(),
        },
        state,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::credal_bounds_single_space;
    use crate::rational::{parse_rational, ratio};
    use crate::theory::parse_theory;

    fn urn_merged() -> Theory {
        parse_theory(
            "choicespace { alternative { a1r: 0.6, a1g: 0.3, a1b: 0.1 }
                           alternative { a2r: 0.2, a2g: 0.35, a2b: 0.45 } }",
        )
        .unwrap()
        .theory
    }

    #[test]
    fn urn_bisection() {
        let t = urn_merged();
        let q = Query::parse("\\+ a1g, \\+ a2r").unwrap();
        let eps = parse_rational("2^-10").unwrap();
        let b = bisect_bounds_traced(&t, &q, &eps).unwrap();
        let exact = credal_bounds_single_space(&t, &q).unwrap();
        assert!(exact.is_within(&b.result));
        assert!(&exact.lower - &b.result.lower < eps);
        assert!(&b.result.upper - &exact.upper < eps);
        assert!(b.psat_calls() <= 24, "{} calls", b.psat_calls());
        for p in &b.probes {
            assert_eq!(p.verdict.is_sat(), exact.contains(&p.alpha));
        }
    }

    #[test]
    fn inner_point_is_inside() {
        let t = urn_merged();
        let q = Query::parse("\\+ a1g, \\+ a2r").unwrap();
        let v = inner_point(&t, &q).unwrap();
        assert!(ratio(1, 2) <= v && v <= ratio(7, 10));
    }

    #[test]
    fn certain_query_has_exact_upper_end() {
        let t = urn_merged();
        let q = Query::default();
        let b = bisect_bounds_traced(&t, &q, &ratio(1, 8)).unwrap();
        assert_eq!(b.result.upper, ratio(1, 1));
        assert_eq!(b.state.unsat_high, None);
        assert!(b.result.lower < ratio(1, 1));
        assert!(ratio(1, 1) - &b.result.lower < ratio(1, 8));
    }

    #[test]
    fn rejects_non_positive_epsilon() {
        let t = urn_merged();
        assert!(matches!(
            bisect_bounds(&t, &Query::default(), &ratio(0, 1)),
            Err(PsatError::BadEpsilon(_))
        ));
    }
}
