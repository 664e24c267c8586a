//! Object ranking from rank marginals.
//!
//! Rank marginals `alpha[i][j]` (object `i` at rank `j`) become a
//! program-free theory with a single choice space. It holds one alternative
//! per object, `{r1(h_i), ..., rn(h_i)}`, and one per rank,
//! `{r_j(h1), ..., r_j(hn)}`. Because atoms are shared across alternatives,
//! the coherent total choices are exactly the permutations. A pairwise query
//! "object `a` is ranked above object `b`" then has an interval of success
//! probabilities, and a preference is declared only when the whole interval
//! lies on one side of the threshold.
//!
//! Object indices in this module are zero-based; atom names are one-based.

mod data;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

pub use data::{
    counts_from_rankings, permutations, smooth_marginals, synthetic_dataset, CountMatrix,
    MarginalMatrix, RankingDataset,
};

use crate::inference::{credal_bounds_single_space, InferenceError, IntervalResult};
use crate::logic::{Atom, Clause, Literal, Program};
use crate::psat::{bisect_bounds, PsatError};
use crate::rational::{int, ratio, to_f64, Rational};
use crate::theory::{Alternative, ChoiceSpace, Query, Theory, TheoryError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RankingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("ranking {ranking} is not a permutation of the objects")]
    NotPermutation { ranking: usize },
    #[error("count rows and columns must all sum to the total")]
    InconsistentCounts,
    #[error("cannot smooth with equivalent size {0}")]
    BadSmoothing(Rational),
    #[error("object index {index} out of range for {n} objects")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("a pairwise query needs two different objects")]
    SameObject,
    #[error("theory is not a ranking theory")]
    NotRankingTheory,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Psat(#[from] PsatError),
}

/// `r{rank}(h{object})`, one-based in both positions.
pub fn rank_atom(object: usize, rank: usize) -> Atom {
    Atom::ground(format!("r{}", rank + 1), &[&format!("h{}", object + 1)])
}

/// Ranking theory of a doubly stochastic marginal matrix.
pub fn build_ranking_theory(m: &MarginalMatrix) -> Result<Theory, RankingError> {
    let n = m.n();
    let mut alternatives = Vec::with_capacity(2 * n);
    for i in 0..n {
        alternatives.push(Alternative::new((0..n).map(|j| rank_atom(i, j))));
    }
    for j in 0..n {
        alternatives.push(Alternative::new((0..n).map(|i| rank_atom(i, j))));
    }
    let mut mu = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            mu.insert(rank_atom(i, j), m.alpha[i][j].clone());
        }
    }
    Ok(Theory::validated(
        Program::default(),
        vec![ChoiceSpace::new(alternatives)],
        mu,
    )?)
}

/// Object count of a theory built by [`build_ranking_theory`].
pub fn ranking_size(t: &Theory) -> Result<usize, RankingError> {
    match t.spaces() {
        [space] if space.alternatives().len() % 2 == 0 => Ok(space.alternatives().len() / 2),
        _ => Err(RankingError::NotRankingTheory),
    }
}

/// Which rank pairs make `q` true in [`pairwise_query`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankConvention {
    /// `q` holds when the first object has the smaller (better) rank.
    #[default]
    BetterFirst,
    /// `q` holds when the first object has the larger rank index.
    LargerIndexFirst,
}

/// Extends a ranking theory with
/// `q :- r_{j1}(h_first), r_{j2}(h_second)` for every admissible rank pair,
/// and returns it with the query `{q}`.
pub fn pairwise_query(
    t: &Theory,
    first: usize,
    second: usize,
    convention: RankConvention,
) -> Result<(Theory, Query), RankingError> {
    let n = ranking_size(t)?;
    for index in [first, second] {
        if index >= n {
            return Err(RankingError::IndexOutOfRange { index, n });
        }
    }
    if first == second {
        return Err(RankingError::SameObject);
    }
    let q = Atom::prop("q");
    let mut clauses = Vec::new();
    for j1 in 0..n {
        for j2 in 0..n {
            let admissible = match convention {
                RankConvention::BetterFirst => j1 < j2,
                RankConvention::LargerIndexFirst => j1 > j2,
            };
            if admissible {
                clauses.push(Clause::rule(
                    q.clone(),
                    vec![
                        Literal::pos(rank_atom(first, j1)),
                        Literal::pos(rank_atom(second, j2)),
                    ],
                ));
            }
        }
    }
    Ok((t.with_clauses(clauses), Query::new([Literal::pos(q)])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    PreferFirst,
    PreferSecond,
    Indeterminate,
}

/// Preference from an interval for "first above second": a clear
/// preference only when the interval lies strictly on one side of the
/// threshold.
pub fn decide_preference(interval: &IntervalResult, threshold: &Rational) -> Verdict {
    if interval.lower > *threshold {
        Verdict::PreferFirst
    } else if interval.upper < *threshold {
        Verdict::PreferSecond
    } else {
        Verdict::Indeterminate
    }
}

/// Verdict of a single probability, indeterminate only on the threshold.
pub fn decide_point(value: &Rational, threshold: &Rational) -> Verdict {
    decide_preference(
        &IntervalResult::exact(value.clone(), value.clone(), crate::inference::Method::Lp),
        threshold,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceDecision {
    pub first: usize,
    pub second: usize,
    pub interval: IntervalResult,
    pub verdict: Verdict,
}

/// Distribution over permutations proportional to
/// `prod_i alpha[i][rank of i]`, listed with [`permutations`] (each entry
/// gives the object at every rank).
///
/// This is the independent reading of the marginals restricted to the
/// coherent worlds.
pub fn icl_proxy(m: &MarginalMatrix) -> Vec<(Vec<usize>, Rational)> {
    let perms = permutations(m.n());
    let weights: Vec<Rational> = perms
        .iter()
        .map(|order| {
            order
                .iter()
                .enumerate()
                .map(|(j, &i)| m.alpha[i][j].clone())
                .product()
        })
        .collect();
    let total: Rational = weights.iter().sum();
    perms
        .into_iter()
        .zip(weights)
        .map(|(p, w)| {
            let w = if total.is_zero() {
                Rational::zero()
            } else {
                w / &total
            };
            (p, w)
        })
        .collect()
}

/// Probability under [`icl_proxy`] that `first` is ranked above `second`.
pub fn icl_pairwise(proxy: &[(Vec<usize>, Rational)], first: usize, second: usize) -> Rational {
    proxy
        .iter()
        .filter(|(order, _)| {
            order.iter().position(|&x| x == first) < order.iter().position(|&x| x == second)
        })
        .map(|(_, w)| w.clone())
        .sum()
}

/// Rank marginals of the proxy distribution.
pub fn proxy_marginals(proxy: &[(Vec<usize>, Rational)], n: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); n]; n];
    for (order, w) in proxy {
        for (j, &i) in order.iter().enumerate() {
            out[i][j] += w;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Lp,
    Psat { epsilon: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Holdout {
    /// Marginals and ground truth both from the full dataset.
    InSample,
    /// Marginals from a seeded random share of the rankings, truth from the
    /// rest.
    Split { test_fraction: Rational, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationOptions {
    pub threshold: Rational,
    pub smoothing: Rational,
    pub backend: Backend,
    pub convention: RankConvention,
    pub holdout: Holdout,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        EvaluationOptions {
            threshold: ratio(1, 2),
            smoothing: int(2),
            backend: Backend::Lp,
            convention: RankConvention::BetterFirst,
            holdout: Holdout::InSample,
        }
    }
}

/// Majority preference in the evaluation rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    First,
    Second,
    Tie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub first: String,
    pub second: String,
    pub interval: IntervalResult,
    pub ccl_verdict: Verdict,
    pub icl_value: Rational,
    pub icl_verdict: Verdict,
    pub truth: Option<Truth>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub determinacy_rate: Option<f64>,
    pub icl_acc_determinate: Option<f64>,
    pub icl_acc_indeterminate: Option<f64>,
    pub ccl_acc_determinate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub objects: Vec<String>,
    pub counts: CountMatrix,
    pub pairs: Vec<PairReport>,
    pub aggregate: Aggregate,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table, one line per pair.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<12} {:<12} {:>10} {:>10} {:<14} {:>8} {:<14} {:<8}\n",
            "first", "second", "lower", "upper", "ccl", "icl", "icl_verdict", "truth"
        );
        for p in &self.pairs {
            out.push_str(&format!(
                "{:<12} {:<12} {:>10.4} {:>10.4} {:<14} {:>8.4} {:<14} {:<8}\n",
                p.first,
                p.second,
                to_f64(&p.interval.lower),
                to_f64(&p.interval.upper),
                verdict_label(p.ccl_verdict, &p.first, &p.second),
                to_f64(&p.icl_value),
                verdict_label(p.icl_verdict, &p.first, &p.second),
                truth_label(p.truth, &p.first, &p.second).unwrap_or_else(|| "-".into()),
            ));
        }
        let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        out.push_str(&format!(
            "determinacy {}  icl_acc_determinate {}  icl_acc_indeterminate {}\n",
            show(self.aggregate.determinacy_rate),
            show(self.aggregate.icl_acc_determinate),
            show(self.aggregate.icl_acc_indeterminate)
        ));
        out
    }
}

fn verdict_label(v: Verdict, first: &str, second: &str) -> String {
    match v {
        Verdict::PreferFirst => format!("{first}>{second}"),
        Verdict::PreferSecond => format!("{second}>{first}"),
        Verdict::Indeterminate => "indeterminate".into(),
    }
}

fn truth_label(t: Option<Truth>, first: &str, second: &str) -> Option<String> {
    t.map(|t| match t {
        Truth::First => format!("{first}>{second}"),
        Truth::Second => format!("{second}>{first}"),
        Truth::Tie => "tie".into(),
    })
}

impl Serialize for PairReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PairReport", 7)?;
        st.serialize_field("pair", &[&self.first, &self.second])?;
        st.serialize_field("interval", &self.interval)?;
        st.serialize_field(
            "ccl_verdict",
            &verdict_label(self.ccl_verdict, &self.first, &self.second),
        )?;
        st.serialize_field("icl_value", &self.icl_value.to_string())?;
        st.serialize_field("icl_value_dec", &to_f64(&self.icl_value))?;
        st.serialize_field(
            "icl_verdict",
            &verdict_label(self.icl_verdict, &self.first, &self.second),
        )?;
        st.serialize_field("truth", &truth_label(self.truth, &self.first, &self.second))?;
        st.end()
    }
}

fn matches_truth(v: Verdict, t: Truth) -> bool {
    matches!(
        (v, t),
        (Verdict::PreferFirst, Truth::First) | (Verdict::PreferSecond, Truth::Second)
    )
}

/// Bounds and verdicts for every pair `first < second` from counts alone.
/// Ground truth is left empty.
pub fn evaluate_counts(
    c: &CountMatrix,
    opts: &EvaluationOptions,
) -> Result<EvaluationReport, RankingError> {
    evaluate_with_truth(c, None, opts)
}

/// Full evaluation: marginals from (part of) the rankings, ground truth by
/// majority over the evaluation rankings, ICL accuracy split by CCL
/// determinacy. Ties are left out of accuracy denominators.
pub fn evaluate(
    d: &RankingDataset,
    opts: &EvaluationOptions,
) -> Result<EvaluationReport, RankingError> {
    let (train, test) = match &opts.holdout {
        Holdout::InSample => (d.clone(), d.clone()),
        Holdout::Split {
            test_fraction,
            seed,
        } => {
            let mut all = d.expanded();
            all.shuffle(&mut StdRng::seed_from_u64(*seed));
            let k = (test_fraction * int(all.len() as i64)).round().to_integer();
            let k: usize = k.try_into().unwrap_or(0).min(all.len());
            let test = all.split_off(all.len() - k);
            let wrap = |rs: Vec<Vec<usize>>| RankingDataset {
                objects: d.objects.clone(),
                rankings: rs.into_iter().map(|r| (r, 1)).collect(),
            };
            (wrap(all), wrap(test))
        }
    };
    evaluate_with_truth(&counts_from_rankings(&train), Some(&test), opts)
}

fn evaluate_with_truth(
    c: &CountMatrix,
    truth_data: Option<&RankingDataset>,
    opts: &EvaluationOptions,
) -> Result<EvaluationReport, RankingError> {
    let m = smooth_marginals(c, &opts.smoothing)?;
    let theory = build_ranking_theory(&m)?;
    let proxy = icl_proxy(&m);
    let n = m.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let reports: Result<Vec<PairReport>, RankingError> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (t, q) = pairwise_query(&theory, a, b, opts.convention)?;
            let interval = match &opts.backend {
                Backend::Lp => credal_bounds_single_space(&t, &q)?,
                Backend::Psat { epsilon } => bisect_bounds(&t, &q, epsilon)?,
            };
            let icl_value = match opts.convention {
                RankConvention::BetterFirst => icl_pairwise(&proxy, a, b),
                RankConvention::LargerIndexFirst => icl_pairwise(&proxy, b, a),
            };
            let truth = truth_data.map(|d| {
                let (wa, wb) = (d.wins(a, b), d.wins(b, a));
                match wa.cmp(&wb) {
                    std::cmp::Ordering::Greater => Truth::First,
                    std::cmp::Ordering::Less => Truth::Second,
                    std::cmp::Ordering::Equal => Truth::Tie,
                }
            });
            Ok(PairReport {
                first: m.objects[a].clone(),
                second: m.objects[b].clone(),
                ccl_verdict: decide_preference(&interval, &opts.threshold),
                icl_verdict: decide_point(&icl_value, &opts.threshold),
                interval,
                icl_value,
                truth,
            })
        })
        .collect();
    let pairs = reports?;
    let aggregate = aggregate(&pairs, truth_data.is_some());
    Ok(EvaluationReport {
        objects: m.objects.clone(),
        counts: c.clone(),
        pairs,
        aggregate,
    })
}

fn aggregate(pairs: &[PairReport], with_truth: bool) -> Aggregate {
    let rate = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let determinate = pairs
        .iter()
        .filter(|p| p.ccl_verdict != Verdict::Indeterminate)
        .count();
    let determinacy_rate = rate(determinate, pairs.len());
    if !with_truth {
        return Aggregate {
            determinacy_rate,
            icl_acc_determinate: None,
            icl_acc_indeterminate: None,
            ccl_acc_determinate: None,
        };
    }
    let scored: Vec<&PairReport> = pairs
        .iter()
        .filter(|p| p.truth.is_some_and(|t| t != Truth::Tie))
        .collect();
    let split = |det: bool| -> Vec<&&PairReport> {
        scored
            .iter()
            .filter(|p| (p.ccl_verdict != Verdict::Indeterminate) == det)
            .collect()
    };
    let acc = |ps: &[&&PairReport], ccl: bool| {
        let ok = ps
            .iter()
            .filter(|p| {
                matches_truth(
                    if ccl { p.ccl_verdict } else { p.icl_verdict },
                    p.truth.expect("scored"),
                )
            })
            .count();
        rate(ok, ps.len())
    };
    let det = split(true);
    let indet = split(false);
    Aggregate {
        determinacy_rate,
        icl_acc_determinate: acc(&det, false),
        icl_acc_indeterminate: acc(&indet, false),
        ccl_acc_determinate: acc(&det, true),
    }
}

/// Whether `proxy` agrees with every marginal of `m`; only then is it a
/// member of the credal set.
pub fn proxy_agrees(proxy: &[(Vec<usize>, Rational)], m: &MarginalMatrix) -> bool {
    proxy_marginals(proxy, m.n()) == m.alpha
        && proxy.iter().map(|(_, w)| w).sum::<Rational>().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worlds::WorldSpace;

    const SAMPLE: &str = "a,b,c x3\na,c,b x5\nb,a,c x2\nb,c,a x4\nc,a,b x3\nc,b,a x1\n";

    fn sample_theory() -> Theory {
        let c = counts_from_rankings(&RankingDataset::parse(SAMPLE).unwrap());
        build_ranking_theory(&smooth_marginals(&c, &int(2)).unwrap()).unwrap()
    }

    #[test]
    fn permutation_worlds() {
        let ws = WorldSpace::build(&sample_theory()).unwrap();
        assert_eq!(ws.len(), 6);
    }

    #[test]
    fn pairwise_clauses() {
        let (t, q) = pairwise_query(&sample_theory(), 0, 1, RankConvention::BetterFirst).unwrap();
        assert_eq!(t.program().len(), 3);
        let ws = WorldSpace::build(&t).unwrap();
        for w in &ws.worlds {
            let rank = |i: usize| (0..3).find(|&j| w.model.is_true(&rank_atom(i, j))).unwrap();
            assert_eq!(w.satisfies(&q).unwrap(), rank(0) < rank(1));
        }
        assert!(matches!(
            pairwise_query(&sample_theory(), 1, 1, RankConvention::BetterFirst),
            Err(RankingError::SameObject)
        ));
        assert!(matches!(
            pairwise_query(&sample_theory(), 0, 3, RankConvention::BetterFirst),
            Err(RankingError::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn decisions() {
        let iv = |l: (i64, i64), u: (i64, i64)| {
            IntervalResult::exact(
                ratio(l.0, l.1),
                ratio(u.0, u.1),
                crate::inference::Method::Lp,
            )
        };
        let half = ratio(1, 2);
        assert_eq!(
            decide_preference(&iv((3, 5), (4, 5)), &half),
            Verdict::PreferFirst
        );
        assert_eq!(
            decide_preference(&iv((3, 10), (7, 10)), &half),
            Verdict::Indeterminate
        );
        assert_eq!(
            decide_preference(&iv((1, 5), (2, 5)), &half),
            Verdict::PreferSecond
        );
        assert_eq!(
            decide_preference(&iv((1, 2), (7, 10)), &half),
            Verdict::Indeterminate
        );
        assert_eq!(
            decide_preference(&iv((1, 2), (1, 2)), &half),
            Verdict::Indeterminate
        );
    }

    #[test]
    fn two_objects_have_point_bounds() {
        let c = CountMatrix {
            objects: vec!["a".into(), "b".into()],
            counts: vec![vec![0; 2]; 2],
            total: 0,
        };
        let t = build_ranking_theory(&smooth_marginals(&c, &int(2)).unwrap()).unwrap();
        let (t, q) = pairwise_query(&t, 0, 1, RankConvention::BetterFirst).unwrap();
        let r = credal_bounds_single_space(&t, &q).unwrap();
        assert_eq!((r.lower, r.upper), (ratio(1, 2), ratio(1, 2)));
    }

    #[test]
    fn identical_rankings_are_determinate() {
        let d = RankingDataset::parse("b,a,c,d x10").unwrap();
        let r = evaluate(&d, &EvaluationOptions::default()).unwrap();
        assert_eq!(r.pairs.len(), 6);
        assert_eq!(r.aggregate.determinacy_rate, Some(1.0));
        assert_eq!(r.aggregate.icl_acc_determinate, Some(1.0));
        assert_eq!(r.aggregate.icl_acc_indeterminate, None);
    }

    #[test]
    fn sample_report() {
        let d = RankingDataset::parse(SAMPLE).unwrap();
        let r = evaluate(&d, &EvaluationOptions::default()).unwrap();
        assert_eq!(
            r.counts.counts,
            vec![vec![8, 6, 4], vec![5, 4, 9], vec![5, 8, 5]]
        );
        let json = r.to_json();
        assert!(json.contains("\"determinacy_rate\""));
        assert!(r.to_table().lines().count() == 5);
    }

    #[test]
    fn holdout_split_is_seeded() {
        let d = synthetic_dataset(4, 40, 0.5, 3);
        let opts = EvaluationOptions {
            holdout: Holdout::Split {
                test_fraction: ratio(1, 4),
                seed: 9,
            },
            ..Default::default()
        };
        let a = evaluate(&d, &opts).unwrap();
        assert_eq!(a.counts.total, 30);
        assert_eq!(a, evaluate(&d, &opts).unwrap());
    }

    #[test]
    fn proxy_is_normalized() {
        let c = counts_from_rankings(&RankingDataset::parse(SAMPLE).unwrap());
        let m = smooth_marginals(&c, &int(2)).unwrap();
        let p = icl_proxy(&m);
        assert_eq!(p.iter().map(|(_, w)| w).sum::<Rational>(), Rational::one());
        let v = icl_pairwise(&p, 0, 1);
        assert_eq!(v.clone() + icl_pairwise(&p, 1, 0), Rational::one());
    }
}
