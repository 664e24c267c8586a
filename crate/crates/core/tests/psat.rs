mod common;

use std::collections::{BTreeMap, BTreeSet};

use ccl::inference::credal_bounds_single_space;
use ccl::logic::Atom;
use ccl::psat::{
    bisect_bounds_traced, build_psat_instance, psat_decide, psat_solve, theory_models,
    BooleanFormula, PsatError, PsatVerdict,
};
use ccl::ranking::{
    build_ranking_theory, counts_from_rankings, rank_atom, smooth_marginals, RankingDataset,
};
use ccl::rational::{int, parse_rational, ratio, Rational};
use ccl::theory::{Query, Theory};
use ccl::worlds::WorldSpace;
use common::*;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn single_space_bundles() -> Vec<(Theory, Query)> {
    ["friends-merged.ccl", "urn-merged.ccl", "ranking-three.ccl"]
        .iter()
        .flat_map(|name| {
            let f = bundled(name);
            f.queries.into_iter().map(move |q| (f.theory.clone(), q))
        })
        .collect()
}

fn assert_grid_sound(t: &Theory, q: &Query) {
    let exact = credal_bounds_single_space(t, q).unwrap();
    for k in 0..=20 {
        let alpha = ratio(k, 20);
        let verdict = psat_decide(&build_psat_instance(t, q, &alpha).unwrap()).unwrap();
        assert_eq!(
            verdict.is_sat(),
            exact.contains(&alpha),
            "alpha {alpha} vs {exact} for {q} on\n{t}"
        );
    }
}

#[test]
fn grid_verdicts_match_exact_bounds_on_bundled_theories() {
    for (t, q) in single_space_bundles() {
        assert_grid_sound(&t, &q);
    }
}

#[test]
fn grid_verdicts_match_exact_bounds_on_random_programs() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..25 {
        let (t, _, _, q) = random_two_space(&mut rng);
        assert_grid_sound(&t.merge_all(), &q);
    }
}

#[test]
fn satisfying_distribution_reproduces_assessments() {
    for (t, q) in single_space_bundles() {
        let exact = credal_bounds_single_space(&t, &q).unwrap();
        let alpha = (&exact.lower + &exact.upper) / int(2);
        let inst = build_psat_instance(&t, &q, &alpha).unwrap();
        let dist = psat_solve(&inst).unwrap().expect("midpoint is satisfiable");
        assert_eq!(
            dist.iter().map(|(_, p)| p.clone()).sum::<Rational>(),
            Rational::one()
        );
        for a in &inst.assessments {
            let mass: Rational = dist
                .iter()
                .filter(|(m, _)| a.formula.eval(&|x: &Atom| m[x]))
                .map(|(_, p)| p.clone())
                .sum();
            assert_eq!(mass, a.prob, "{}", a.formula);
        }
    }
}

#[test]
fn models_are_the_possible_worlds() {
    let mut theories: Vec<Theory> = single_space_bundles().into_iter().map(|(t, _)| t).collect();
    let mut rng = StdRng::seed_from_u64(32);
    theories.extend((0..20).map(|_| random_two_space(&mut rng).0.merge_all()));
    for t in theories {
        let base = t.herbrand_base();
        let restrict = |m: &BTreeMap<Atom, bool>| -> BTreeSet<Atom> {
            m.iter()
                .filter(|(a, v)| **v && base.contains(*a))
                .map(|(a, _)| a.clone())
                .collect()
        };
        let models: BTreeSet<BTreeSet<Atom>> =
            theory_models(&t).unwrap().iter().map(restrict).collect();
        let ws = WorldSpace::build(&t).unwrap();
        let worlds: BTreeSet<BTreeSet<Atom>> = ws
            .worlds
            .iter()
            .map(|w| w.model.true_atoms().cloned().collect())
            .collect();
        assert_eq!(theory_models(&t).unwrap().len(), ws.len(), "on\n{t}");
        assert_eq!(models, worlds, "on\n{t}");
    }
}

#[test]
fn ranking_models_are_permutation_matrices() {
    let data = RankingDataset::parse(
        &std::fs::read_to_string(data_path("three-objects.rankings")).unwrap(),
    )
    .unwrap();
    let m = smooth_marginals(&counts_from_rankings(&data), &int(2)).unwrap();
    let t = build_ranking_theory(&m).unwrap();
    let models = theory_models(&t).unwrap();
    assert_eq!(models.len(), 6);
    for model in &models {
        for i in 0..3 {
            assert_eq!((0..3).filter(|&j| model[&rank_atom(i, j)]).count(), 1);
            assert_eq!((0..3).filter(|&j| model[&rank_atom(j, i)]).count(), 1);
        }
    }
}

fn assert_bracket(t: &Theory, q: &Query, epsilon: &Rational) {
    let exact = credal_bounds_single_space(t, q).unwrap();
    let run = bisect_bounds_traced(t, q, epsilon).unwrap();
    let r = &run.result;
    assert!(
        r.lower <= exact.lower && exact.upper <= r.upper,
        "{r} vs {exact}"
    );
    assert!(
        &exact.lower - &r.lower <= *epsilon && &r.upper - &exact.upper <= *epsilon,
        "{r} vs {exact}"
    );
    for p in &run.probes {
        assert_eq!(
            p.verdict.is_sat(),
            exact.contains(&p.alpha),
            "probe {}",
            p.alpha
        );
    }
    let s = &run.state;
    assert!(exact.contains(&s.sat_low) && exact.contains(&s.sat_high));
    assert!(s.lower_gap() < *epsilon && s.upper_gap() < *epsilon);
    assert_eq!(s.outer(), (r.lower.clone(), r.upper.clone()));
}

#[test]
fn bisection_brackets_the_exact_interval() {
    let epsilons = ["2^-4", "2^-7", "2^-10", "1/100"].map(|e| parse_rational(e).unwrap());
    for (t, q) in single_space_bundles() {
        for e in &epsilons {
            assert_bracket(&t, &q, e);
        }
    }
    let mut rng = StdRng::seed_from_u64(33);
    for _ in 0..15 {
        let (t, _, q) = random_single_space(&mut rng);
        assert_bracket(&t, &q, &epsilons[2]);
    }
}

#[test]
fn bisection_call_budget() {
    let epsilon = parse_rational("2^-10").unwrap();
    for (t, q) in single_space_bundles() {
        assert!(bisect_bounds_traced(&t, &q, &epsilon).unwrap().psat_calls() <= 24);
    }
}

#[test]
fn degenerate_interval_has_width_at_most_two_epsilon() {
    let t = theory_of(
        Vec::new(),
        &[vec![vec![
            (prop("a"), ratio(3, 10)),
            (prop("b"), ratio(7, 10)),
        ]]],
    );
    let q = Query::parse("a").unwrap();
    let epsilon = parse_rational("2^-10").unwrap();
    let r = bisect_bounds_traced(&t, &q, &epsilon).unwrap().result;
    assert!(r.contains(&ratio(3, 10)));
    assert!(r.width() <= &epsilon * int(2), "{r}");
}

#[test]
fn bisection_rejects_nonpositive_epsilon() {
    let (t, q) = single_space_bundles().remove(0);
    assert!(matches!(
        bisect_bounds_traced(&t, &q, &Rational::zero()),
        Err(PsatError::BadEpsilon(_))
    ));
}

#[test]
fn unsatisfiable_hard_formula_is_unsat() {
    let mut inst = ccl::psat::PsatInstance::default();
    let a = BooleanFormula::var(prop("a"));
    inst.push(
        BooleanFormula::And(vec![a.clone(), a.clone().negate()]),
        Rational::one(),
    );
    assert_eq!(psat_decide(&inst).unwrap(), PsatVerdict::Unsat);
}

fn formula_strategy() -> impl Strategy<Value = BooleanFormula> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(BooleanFormula::Const),
        prop::sample::select(vec!["p", "q", "r", "s"]).prop_map(|v| BooleanFormula::var(prop(v))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(BooleanFormula::negate),
            prop::collection::vec(inner.clone(), 0..4).prop_map(BooleanFormula::And),
            prop::collection::vec(inner.clone(), 0..4).prop_map(BooleanFormula::Or),
            prop::collection::vec(inner.clone(), 0..4).prop_map(BooleanFormula::ExactlyOne),
            (inner.clone(), inner).prop_map(|(a, b)| BooleanFormula::iff(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn cnf_is_equivalent(f in formula_strategy()) {
        let cnf = f.to_cnf().unwrap();
        let vars = ["p", "q", "r", "s"].map(prop);
        for bits in 0..16u32 {
            let value = |a: &Atom| vars.iter().position(|v| v == a).is_some_and(|k| bits >> k & 1 == 1);
            prop_assert_eq!(cnf.eval(&value), f.eval(&value), "{} vs {}", f, cnf);
        }
    }
}
