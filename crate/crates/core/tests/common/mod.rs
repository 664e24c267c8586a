//! Independent oracles and random generators shared by the integration tests.
//!
//! Nothing here calls into the library's evaluation, world enumeration,
//! polytope or LP code; the oracles recompute everything by brute force.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ccl::logic::{Atom, Clause, Literal, Program};
use ccl::rational::{int, ratio, Rational};
use ccl::theory::{parse_theory, Alternative, ChoiceSpace, Query, Theory};
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn bundled(name: &str) -> ccl::theory::TheoryFile {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_theory(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn data_path(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Fixpoint of "an atom holds iff it is a fact or heads a clause whose body
/// holds", iterated from all-false. Panics if it does not settle.
pub fn naive_model(clauses: &[Clause], facts: &BTreeSet<Atom>) -> BTreeMap<Atom, bool> {
    let mut atoms: BTreeSet<Atom> = clauses.iter().flat_map(|c| c.atoms().cloned()).collect();
    atoms.extend(facts.iter().cloned());
    let mut truth: BTreeMap<Atom, bool> = atoms.iter().map(|a| (a.clone(), false)).collect();
    for _ in 0..=atoms.len() + 1 {
        let next: BTreeMap<Atom, bool> = atoms
            .iter()
            .map(|a| {
                let v = facts.contains(a)
                    || clauses.iter().any(|c| {
                        c.head == *a && c.body.iter().all(|l| truth[&l.atom] == l.positive)
                    });
                (a.clone(), v)
            })
            .collect();
        if next == truth {
            return truth;
        }
        truth = next;
    }
    panic!("naive evaluation did not settle");
}

pub fn prop(name: impl Into<String>) -> Atom {
    Atom::prop(name)
}

/// Random ground program over `x0..x{n-1}` that is acyclic by construction:
/// bodies only mention atoms earlier in a random order.
pub fn random_acyclic_program(rng: &mut StdRng, n: usize) -> Vec<Clause> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let atom = |i: usize| prop(format!("x{i}"));
    let mut clauses = Vec::new();
    for p in 0..n {
        let head = atom(order[p]);
        if p > 0 && rng.gen_bool(0.7) {
            for _ in 0..rng.gen_range(1..=2) {
                let len = rng.gen_range(1..=3.min(p));
                let body = (0..len)
                    .map(|_| {
                        let b = atom(order[rng.gen_range(0..p)]);
                        if rng.gen_bool(0.35) {
                            Literal::neg(b)
                        } else {
                            Literal::pos(b)
                        }
                    })
                    .collect();
                clauses.push(Clause::rule(head.clone(), body));
            }
        } else if rng.gen_bool(0.2) {
            clauses.push(Clause::fact(head));
        }
    }
    clauses
}

/// `k` non-negative multiples of `1/denom` summing to one.
pub fn random_masses(rng: &mut StdRng, k: usize, denom: i64) -> Vec<Rational> {
    let mut cuts: Vec<i64> = (0..k - 1).map(|_| rng.gen_range(0..=denom)).collect();
    cuts.push(0);
    cuts.push(denom);
    cuts.sort();
    cuts.windows(2).map(|w| ratio(w[1] - w[0], denom)).collect()
}

/// Alternatives with their masses, atoms named `{prefix}{alt}_{k}`.
pub type Layout = Vec<Vec<(Atom, Rational)>>;

pub fn random_alternatives(rng: &mut StdRng, prefix: &str, sizes: &[usize], denom: i64) -> Layout {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let masses = random_masses(rng, s, denom);
            (0..s)
                .map(|k| (prop(format!("{prefix}{i}_{k}")), masses[k].clone()))
                .collect()
        })
        .collect()
}

pub fn theory_of(program: Vec<Clause>, spaces: &[Layout]) -> Theory {
    let mut mu = BTreeMap::new();
    let cs = spaces
        .iter()
        .map(|layout| {
            ChoiceSpace::new(
                layout
                    .iter()
                    .map(|alt| {
                        for (a, m) in alt {
                            mu.insert(a.clone(), m.clone());
                        }
                        Alternative::new(alt.iter().map(|(a, _)| a.clone()))
                    })
                    .collect(),
            )
        })
        .collect();
    Theory::validated(Program::new(program), cs, mu).expect("generated theory is valid")
}

/// Every selection of one atom per disjoint alternative, first alternative
/// most significant.
pub fn selections(layout: &Layout) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for alt in layout {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..alt.len()).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn selected_atoms(layout: &Layout, sel: &[usize]) -> BTreeSet<Atom> {
    sel.iter()
        .enumerate()
        .map(|(i, &k)| layout[i][k].0.clone())
        .collect()
}

/// Marginal agreement system `A x = b` over the selections of one space of
/// disjoint alternatives: normalization, then one row per atom.
pub fn agreement_system(layout: &Layout) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let sels = selections(layout);
    let mut a = vec![vec![Rational::one(); sels.len()]];
    let mut b = vec![Rational::one()];
    for (i, alt) in layout.iter().enumerate() {
        for (k, (_, m)) in alt.iter().enumerate() {
            a.push(
                sels.iter()
                    .map(|s| {
                        if s[i] == k {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect(),
            );
            b.push(m.clone());
        }
    }
    (a, b)
}

/// Extreme points of `{x >= 0 : A x = b}` by trying every column subset:
/// a subset is a basis of a vertex when its columns are independent and the
/// unique solution is non-negative.
pub fn oracle_vertices(a: &[Vec<Rational>], b: &[Rational]) -> BTreeSet<Vec<Rational>> {
    let n = a[0].len();
    let mut out = BTreeSet::new();
    let mut subset = Vec::new();
    subsets(n, rank(a).min(n), 0, &mut subset, &mut |cols| {
        if let Some(x) = solve_columns(a, b, cols) {
            if x.iter().all(|v| !v.is_negative()) {
                let mut full = vec![Rational::zero(); n];
                for (c, v) in cols.iter().zip(x) {
                    full[*c] = v;
                }
                out.insert(full);
            }
        }
    });
    out
}

/// Row rank by Gaussian elimination.
fn rank(a: &[Vec<Rational>]) -> usize {
    let mut m = a.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            if !m[i][c].is_zero() {
                let f = &m[i][c] / &m[r][c];
                let pr = m[r].clone();
                for (v, pv) in m[i].iter_mut().zip(&pr) {
                    *v -= &f * pv;
                }
            }
        }
        r += 1;
    }
    r
}

fn subsets(
    n: usize,
    max: usize,
    start: usize,
    current: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if !current.is_empty() {
        f(current);
    }
    if current.len() == max {
        return;
    }
    for c in start..n {
        current.push(c);
        subsets(n, max, c + 1, current, f);
        current.pop();
    }
}

/// Unique solution of `A[:, cols] y = b`, or `None` if the columns are
/// dependent or the system inconsistent.
fn solve_columns(a: &[Vec<Rational>], b: &[Rational], cols: &[usize]) -> Option<Vec<Rational>> {
    let k = cols.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r: Vec<Rational> = cols.iter().map(|&c| row[c].clone()).collect();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut row = 0;
    for col in 0..k {
        let p = (row..m.len()).find(|&r| !m[r][col].is_zero())?;
        m.swap(row, p);
        let pivot = m[row][col].clone();
        for v in m[row].iter_mut() {
            *v /= &pivot;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pr = m[row].clone();
                for (v, pv) in m[r].iter_mut().zip(&pr) {
                    *v -= &f * pv;
                }
            }
        }
        row += 1;
    }
    if m[row..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

/// One or two random literals over `atoms`.
pub fn random_query(rng: &mut StdRng, atoms: &[Atom]) -> Query {
    let len = rng.gen_range(1..=2);
    Query::new((0..len).map(|_| {
        let a = atoms[rng.gen_range(0..atoms.len())].clone();
        if rng.gen_bool(0.4) {
            Literal::neg(a)
        } else {
            Literal::pos(a)
        }
    }))
}

pub fn holds(query: &Query, model: &BTreeMap<Atom, bool>) -> bool {
    query
        .literals()
        .iter()
        .all(|l| model.get(&l.atom).copied().unwrap_or(false) == l.positive)
}

/// Random single-space theory: up to four disjoint alternatives of two or
/// three atoms, at most 16 joint selections, masses in `1/denom` steps.
pub fn random_single_space(rng: &mut StdRng) -> (Theory, Layout, Query) {
    loop {
        let k = rng.gen_range(1..=4);
        let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(2..=3)).collect();
        if sizes.iter().product::<usize>() > 16 {
            continue;
        }
        let denom = [4, 5, 10, 12, 20][rng.gen_range(0..5)];
        let layout = random_alternatives(rng, "a", &sizes, denom);
        let atoms: Vec<Atom> = layout.iter().flatten().map(|(a, _)| a.clone()).collect();
        let q = random_query(rng, &atoms);
        return (
            theory_of(Vec::new(), std::slice::from_ref(&layout)),
            layout,
            q,
        );
    }
}

/// Exact bounds by brute force over the oracle's vertices.
pub fn oracle_single_space_bounds(
    layout: &Layout,
    query: &Query,
    program: &[Clause],
) -> (Rational, Rational) {
    let (a, b) = agreement_system(layout);
    let sels = selections(layout);
    let sat: Vec<bool> = sels
        .iter()
        .map(|s| holds(query, &naive_model(program, &selected_atoms(layout, s))))
        .collect();
    let values: Vec<Rational> = oracle_vertices(&a, &b)
        .into_iter()
        .map(|x| {
            x.iter()
                .zip(&sat)
                .filter(|(_, s)| **s)
                .map(|(v, _)| v.clone())
                .sum()
        })
        .collect();
    assert!(!values.is_empty(), "oracle found no vertex");
    (
        values.iter().min().unwrap().clone(),
        values.iter().max().unwrap().clone(),
    )
}

/// A space for the grid oracle: one alternative (a single point) or two
/// binary alternatives (a segment), masses in twentieths.
pub fn random_grid_space(rng: &mut StdRng, prefix: &str) -> Layout {
    if rng.gen_bool(0.5) {
        let s = rng.gen_range(2..=3);
        random_alternatives(rng, prefix, &[s], 20)
    } else {
        random_alternatives(rng, prefix, &[2, 2], 20)
    }
}

/// Points of the marginal set of a grid space on a `1/1000` lattice, as
/// selection weights in [`selections`] order.
pub fn grid_points(layout: &Layout) -> Vec<Vec<f64>> {
    let f = |q: &Rational| ccl::rational::to_f64(q);
    match layout.len() {
        1 => vec![layout[0].iter().map(|(_, m)| f(m)).collect()],
        2 => {
            let (ma, mb) = (f(&layout[0][0].1), f(&layout[1][0].1));
            let lo = (ma + mb - 1.0).max(0.0);
            let hi = ma.min(mb);
            let steps = ((hi - lo) * 1000.0).round() as i64;
            (0..=steps)
                .map(|k| {
                    let t = lo + k as f64 / 1000.0;
                    vec![t, ma - t, mb - t, 1.0 - ma - mb + t]
                })
                .collect()
        }
        _ => unreachable!("grid spaces have one or two alternatives"),
    }
}

/// Random program deriving `d0` and `d1` from choice atoms.
pub fn random_derivations(rng: &mut StdRng, atoms: &[Atom]) -> Vec<Clause> {
    let mut clauses = Vec::new();
    for d in ["d0", "d1"] {
        for _ in 0..rng.gen_range(1..=2) {
            let len = rng.gen_range(1..=2);
            let body = (0..len)
                .map(|_| {
                    let a = atoms[rng.gen_range(0..atoms.len())].clone();
                    if rng.gen_bool(0.3) {
                        Literal::neg(a)
                    } else {
                        Literal::pos(a)
                    }
                })
                .collect();
            clauses.push(Clause::rule(prop(d), body));
        }
    }
    clauses
}

/// Two-space theory for the grid oracle, with a query over derived and
/// choice atoms.
pub fn random_two_space(rng: &mut StdRng) -> (Theory, [Layout; 2], Vec<Clause>, Query) {
    let s1 = random_grid_space(rng, "u");
    let s2 = random_grid_space(rng, "v");
    let atoms: Vec<Atom> = s1
        .iter()
        .chain(&s2)
        .flatten()
        .map(|(a, _)| a.clone())
        .collect();
    let program = random_derivations(rng, &atoms);
    let mut query_atoms = atoms;
    query_atoms.extend([prop("d0"), prop("d1")]);
    let q = random_query(rng, &query_atoms);
    let t = theory_of(program.clone(), &[s1.clone(), s2.clone()]);
    (t, [s1, s2], program, q)
}

/// Grid-search bounds over products of the two spaces' lattice points.
pub fn grid_bounds(layouts: &[Layout; 2], program: &[Clause], query: &Query) -> (f64, f64) {
    let sel1 = selections(&layouts[0]);
    let sel2 = selections(&layouts[1]);
    let sat: Vec<Vec<bool>> = sel1
        .iter()
        .map(|a| {
            sel2.iter()
                .map(|b| {
                    let mut facts = selected_atoms(&layouts[0], a);
                    facts.extend(selected_atoms(&layouts[1], b));
                    holds(query, &naive_model(program, &facts))
                })
                .collect()
        })
        .collect();
    let g1 = grid_points(&layouts[0]);
    let g2 = grid_points(&layouts[1]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in &g1 {
        let u: Vec<f64> = (0..sel2.len())
            .map(|j| (0..sel1.len()).filter(|&i| sat[i][j]).map(|i| x[i]).sum())
            .collect();
        for y in &g2 {
            let v: f64 = u.iter().zip(y).map(|(a, b)| a * b).sum();
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    (lo, hi)
}

pub fn half() -> Rational {
    ratio(1, 2)
}

pub fn one() -> Rational {
    int(1)
}
