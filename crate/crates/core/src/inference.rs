//! Success probabilities of queries: the ICL point value and exact lower and
//! upper bounds over the strong extension.
//!
//! The strong extension of a theory is the set of products `mu_1 x ... x mu_k`
//! with each `mu_i` in the marginal credal set of choice space `i`. A world
//! gets `prod_i mu_i(E_i)`, where `E_i` is its class in space `i`. The
//! success probability of a query is therefore multilinear in the per-space
//! mass functions, and its extrema are attained at products of extreme points.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::lp::LpError;
use crate::polytope::{MarginalPolytope, MassFunction, PolytopeError};
use crate::rational::{to_f64, Pretty, Rational};
use crate::theory::{Query, Theory, TheoryError};
use crate::worlds::{WorldError, WorldSpace};

/// Default ceiling on vertex combinations tried by the strong-extension search.
pub const DEFAULT_COMBINATION_CAP: u128 = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InferenceError {
    #[error("theory has {spaces} choice spaces; this method needs exactly one")]
    NotSingleSpace { spaces: usize },
    #[error("ICL probability needs every choice space to be a single alternative")]
    NotIcl,
    #[error("alternatives {first} and {second} of choice space {space} overlap; they cannot be treated as independent")]
    OverlappingAlternatives {
        space: usize,
        first: String,
        second: String,
    },
    #[error("{count} vertex combinations exceed the cap of {cap}")]
    TooManyCombinations { count: u128, cap: u128 },
    #[error("choice space {space} admits no mass function agreeing with the marginals")]
    EmptyCredalSet { space: usize },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lp,
    VertexProduct,
    OuterBound,
    PsatBisect,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Lp => "lp",
            Method::VertexProduct => "vertex_product",
            Method::OuterBound => "outer_bound",
            Method::PsatBisect => "psat_bisect",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lower and upper success probability of a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalResult {
    pub lower: Rational,
    pub upper: Rational,
    pub method: Method,
    /// Zero for exact methods.
    pub epsilon: Rational,
}

impl IntervalResult {
    pub fn exact(lower: Rational, upper: Rational, method: Method) -> Self {
        IntervalResult {
            lower,
            upper,
            method,
            epsilon: Rational::zero(),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lower <= *x && *x <= self.upper
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &IntervalResult) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("interval serializes")
    }
}

impl Serialize for IntervalResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IntervalResult", 6)?;
        st.serialize_field("lower", &self.lower.to_string())?;
        st.serialize_field("upper", &self.upper.to_string())?;
        st.serialize_field("lower_dec", &to_f64(&self.lower))?;
        st.serialize_field("upper_dec", &to_f64(&self.upper))?;
        st.serialize_field("method", self.method.as_str())?;
        st.serialize_field("epsilon", &self.epsilon.to_string())?;
        st.end()
    }
}

impl fmt::Display for IntervalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] ({}",
            Pretty(&self.lower),
            Pretty(&self.upper),
            self.method
        )?;
        if !self.epsilon.is_zero() {
            write!(f, ", eps {}", Pretty(&self.epsilon))?;
        }
        f.write_str(")")
    }
}

/// Success probability under the ICL reading: every choice space must be a
/// single alternative, and alternatives are independent.
pub fn icl_probability(theory: &Theory, query: &Query) -> Result<Rational, InferenceError> {
    if !theory.is_icl() {
        return Err(InferenceError::NotIcl);
    }
    independent_probability(theory, query)
}

/// Success probability when every alternative is treated as independent,
/// world weight `prod_C mu(selected(C))`.
///
/// Alternatives inside a space must be pairwise disjoint; then this product
/// agrees with every marginal and lies in the strong extension.
pub fn independent_probability(theory: &Theory, query: &Query) -> Result<Rational, InferenceError> {
    for (i, space) in theory.spaces().iter().enumerate() {
        let alts = space.alternatives();
        for (k, a) in alts.iter().enumerate() {
            if let Some(b) = alts[k + 1..]
                .iter()
                .find(|b| a.atoms().iter().any(|x| b.contains(x)))
            {
                return Err(InferenceError::OverlappingAlternatives {
                    space: i + 1,
                    first: a.to_string(),
                    second: b.to_string(),
                });
            }
        }
    }
    let ws = WorldSpace::build(theory)?;
    let mut total = Rational::zero();
    for w in ws.satisfying(query)? {
        let mut weight = Rational::one();
        for part in &ws.worlds[w].choice.parts {
            for a in &part.selection {
                weight *= theory.mass(a).expect("validated theory has every mass");
            }
        }
        total += weight;
    }
    Ok(total)
}

/// Satisfying worlds, checked against the Herbrand base first.
fn satisfying(
    theory: &Theory,
    ws: &WorldSpace,
    query: &Query,
) -> Result<Vec<usize>, InferenceError> {
    theory.check_query(query)?;
    Ok(ws.satisfying(query)?)
}

/// Exact bounds for a theory with exactly one choice space, by two linear
/// programs over the marginal credal set (whose classes are the worlds).
pub fn credal_bounds_single_space(
    theory: &Theory,
    query: &Query,
) -> Result<IntervalResult, InferenceError> {
    let (interval, _, _) = single_space_bounds_with_witnesses(theory, query)?;
    Ok(interval)
}

/// As [`credal_bounds_single_space`], also returning minimizing and
/// maximizing mass functions over the worlds.
pub fn single_space_bounds_with_witnesses(
    theory: &Theory,
    query: &Query,
) -> Result<(IntervalResult, MassFunction, MassFunction), InferenceError> {
    if theory.spaces().len() != 1 {
        return Err(InferenceError::NotSingleSpace {
            spaces: theory.spaces().len(),
        });
    }
    let ws = WorldSpace::build(theory)?;
    let sat = satisfying(theory, &ws, query)?;
    let polytope = MarginalPolytope::of_space(theory, 0);
    let mut objective = vec![Rational::zero(); polytope.classes.len()];
    for w in sat {
        objective[ws.class_of[w][0]] = Rational::one();
    }
    let lp = polytope.linear_program();
    let empty = |_: LpError| InferenceError::EmptyCredalSet { space: 1 };
    let lo = lp.minimize(&objective).map_err(empty)?;
    let hi = lp.maximize(&objective).map_err(empty)?;
    Ok((
        IntervalResult::exact(lo.value, hi.value, Method::Lp),
        MassFunction(lo.point),
        MassFunction(hi.point),
    ))
}

/// Extreme points of every space's marginal credal set.
pub fn space_vertices(theory: &Theory) -> Result<Vec<Vec<MassFunction>>, InferenceError> {
    theory.ensure_valid()?;
    (0..theory.spaces().len())
        .map(|i| {
            MarginalPolytope::of_space(theory, i)
                .vertices()
                .map_err(InferenceError::from)
        })
        .collect()
}

/// Exact bounds over the strong extension by evaluating the query at every
/// product of per-space extreme points.
pub fn credal_bounds_strong_extension(
    theory: &Theory,
    query: &Query,
) -> Result<IntervalResult, InferenceError> {
    credal_bounds_strong_extension_with_cap(theory, query, DEFAULT_COMBINATION_CAP)
}

pub fn credal_bounds_strong_extension_with_cap(
    theory: &Theory,
    query: &Query,
    cap: u128,
) -> Result<IntervalResult, InferenceError> {
    let ws = WorldSpace::build(theory)?;
    let sat = satisfying(theory, &ws, query)?;
    let vertices = space_vertices(theory).map_err(|e| match e {
        InferenceError::Polytope(PolytopeError::Empty { space }) => {
            InferenceError::EmptyCredalSet { space }
        }
        other => other,
    })?;
    let sizes: Vec<usize> = vertices.iter().map(Vec::len).collect();
    let count: u128 = sizes.iter().map(|&s| s as u128).product();
    if count > cap {
        return Err(InferenceError::TooManyCombinations { count, cap });
    }
    let class_of: Vec<&[usize]> = sat.iter().map(|&w| ws.class_of[w].as_slice()).collect();
    let evaluate = |combo: u128| -> Rational {
        let mut picks = Vec::with_capacity(sizes.len());
        let mut rest = combo;
        for &s in sizes.iter().rev() {
            picks.push((rest % s as u128) as usize);
            rest /= s as u128;
        }
        picks.reverse();
        class_of
            .iter()
            .map(|classes| {
                classes
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| vertices[i][picks[i]].0[c].clone())
                    .product::<Rational>()
            })
            .sum()
    };
    let (lower, upper) = (0..count as u64)
        .into_par_iter()
        .map(|c| {
            let v = evaluate(c as u128);
            (v.clone(), v)
        })
        .reduce_with(|(l1, u1), (l2, u2)| (l1.min(l2), u1.max(u2)))
        .expect("at least one vertex combination");
    Ok(IntervalResult::exact(lower, upper, Method::VertexProduct))
}

/// Factorized outer bound: per world, the product over spaces of the
/// smallest (largest) probability its class can receive, summed over the
/// satisfying worlds. The upper sum is clipped to 1.
pub fn outer_bound(theory: &Theory, query: &Query) -> Result<IntervalResult, InferenceError> {
    let ws = WorldSpace::build(theory)?;
    let sat = satisfying(theory, &ws, query)?;
    let polytopes: Vec<MarginalPolytope> = (0..theory.spaces().len())
        .map(|i| MarginalPolytope::of_space(theory, i))
        .collect();
    let mut ranges: BTreeMap<(usize, usize), (Rational, Rational)> = BTreeMap::new();
    let mut lower = Rational::zero();
    let mut upper = Rational::zero();
    for w in sat {
        let mut lo = Rational::one();
        let mut hi = Rational::one();
        for (i, &c) in ws.class_of[w].iter().enumerate() {
            if let std::collections::btree_map::Entry::Vacant(slot) = ranges.entry((i, c)) {
                slot.insert(polytopes[i].class_range(c).map_err(|e| match e {
                    PolytopeError::Empty { space } => InferenceError::EmptyCredalSet { space },
                    other => other.into(),
                })?);
            }
            let (l, h) = &ranges[&(i, c)];
            lo *= l;
            hi *= h;
        }
        lower += lo;
        upper += hi;
    }
    if upper > Rational::one() {
        upper = Rational::one();
    }
    Ok(IntervalResult::exact(lower, upper, Method::OuterBound))
}

/// Query probability under an explicit joint mass function over the worlds.
pub fn probability_under(
    ws: &WorldSpace,
    joint: &MassFunction,
    query: &Query,
) -> Result<Rational, InferenceError> {
    Ok(ws
        .satisfying(query)?
        .into_iter()
        .map(|w| joint.0[w].clone())
        .sum())
}
