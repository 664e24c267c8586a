use std::collections::{BTreeMap, BTreeSet};

use super::syntax::{Atom, Clause, GroundProgram, Interpretation, LevelMapping, Program};
use super::LogicError;

/// Every grounding of every clause over `constants`, in clause order.
///
/// Substitutions are enumerated with the clause's variables in order of first
/// occurrence and constants in lexicographic order, so the output is
/// deterministic. Ground clauses pass through unchanged.
pub fn ground(program: &Program, constants: &BTreeSet<String>) -> GroundProgram {
    let consts: Vec<&str> = constants.iter().map(String::as_str).collect();
    let mut clauses = Vec::new();
    for clause in &program.clauses {
        let vars = clause.variables();
        if vars.is_empty() {
            clauses.push(clause.clone());
            continue;
        }
        if consts.is_empty() {
            continue;
        }
        let mut idx = vec![0usize; vars.len()];
        'odometer: loop {
            let binding: BTreeMap<&str, &str> = vars
                .iter()
                .zip(&idx)
                .map(|(v, &i)| (*v, consts[i]))
                .collect();
            clauses.push(Clause {
                head: clause.head.substitute(&binding),
                body: clause
                    .body
                    .iter()
                    .map(|l| super::Literal {
                        atom: l.atom.substitute(&binding),
                        positive: l.positive,
                    })
                    .collect(),
            });
            // last variable varies fastest
            for k in (0..vars.len()).rev() {
                idx[k] += 1;
                if idx[k] < consts.len() {
                    continue 'odometer;
                }
                idx[k] = 0;
            }
            break;
        }
    }
    GroundProgram::from_clauses(clauses).expect("grounding removes every variable")
}

/// Grounds over the constants that occur in the program itself.
pub fn ground_self(program: &Program) -> GroundProgram {
    ground(program, &program.constants())
}

/// Topological layering of the body-to-head dependency graph.
///
/// Atoms that head no rule get level 1; otherwise a head sits one above its
/// highest body atom. Fails with one concrete cycle when the graph is cyclic.
pub fn check_acyclic(gp: &GroundProgram) -> Result<LevelMapping, LogicError> {
    let rules = gp.rules_by_head();
    let mut level: BTreeMap<Atom, u32> = BTreeMap::new();
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&Atom, Mark> = BTreeMap::new();

    // Iterative DFS so deep chains do not overflow the stack.
    for root in gp.herbrand_base() {
        if marks.contains_key(root) {
            continue;
        }
        let mut stack: Vec<(&Atom, Vec<&Atom>)> = vec![(root, deps(&rules, root))];
        marks.insert(root, Mark::Active);
        while let Some((atom, pending)) = stack.last_mut() {
            let atom = *atom;
            if let Some(next) = pending.pop() {
                match marks.get(next) {
                    Some(Mark::Done) => {}
                    Some(Mark::Active) => {
                        let start = stack.iter().position(|(a, _)| *a == next).unwrap();
                        let cycle = stack[start..].iter().map(|(a, _)| (*a).clone()).collect();
                        return Err(LogicError::Cyclic { cycle });
                    }
                    None => {
                        marks.insert(next, Mark::Active);
                        stack.push((next, deps(&rules, next)));
                    }
                }
            } else {
                let l = deps(&rules, atom)
                    .iter()
                    .map(|b| level[*b])
                    .max()
                    .map_or(1, |m| m + 1);
                level.insert(atom.clone(), l);
                marks.insert(atom, Mark::Done);
                stack.pop();
            }
        }
    }
    Ok(LevelMapping { level })
}

fn deps<'a>(rules: &BTreeMap<&'a Atom, Vec<&'a Clause>>, atom: &Atom) -> Vec<&'a Atom> {
    let mut out: Vec<&Atom> = rules
        .get(atom)
        .into_iter()
        .flatten()
        .flat_map(|c| c.body.iter().map(|l| &l.atom))
        .collect();
    out.sort();
    out.dedup();
    out.reverse();
    out
}

/// Precomputed level order for repeated stable-model evaluation of one program
/// under different fact sets.
#[derive(Debug, Clone)]
pub struct Evaluator {
    order: Vec<Atom>,
    rules: BTreeMap<Atom, Vec<Vec<super::Literal>>>,
}

impl Evaluator {
    pub fn new(gp: &GroundProgram) -> Result<Self, LogicError> {
        let levels = check_acyclic(gp)?;
        let order = levels.evaluation_order().into_iter().cloned().collect();
        let mut rules: BTreeMap<Atom, Vec<Vec<super::Literal>>> = BTreeMap::new();
        for c in gp.clauses() {
            rules
                .entry(c.head.clone())
                .or_default()
                .push(c.body.clone());
        }
        Ok(Evaluator { order, rules })
    }

    /// Unique stable model of the program extended with `facts`.
    ///
    /// The interpretation covers the Herbrand base plus the facts.
    pub fn eval(&self, facts: &BTreeSet<Atom>) -> Interpretation {
        let mut truth: BTreeMap<Atom, bool> = BTreeMap::new();
        for a in facts {
            truth.insert(a.clone(), true);
        }
        for atom in &self.order {
            if facts.contains(atom) {
                continue;
            }
            let derived = self.rules.get(atom).is_some_and(|bodies| {
                bodies.iter().any(|body| {
                    body.iter()
                        .all(|l| truth.get(&l.atom).copied().unwrap_or(false) == l.positive)
                })
            });
            truth.insert(atom.clone(), derived);
        }
        Interpretation { truth }
    }
}

/// The unique stable model of `gp ∪ {a. | a ∈ facts}`.
pub fn stable_model(
    gp: &GroundProgram,
    facts: &BTreeSet<Atom>,
) -> Result<Interpretation, LogicError> {
    // Facts never add dependency edges, so acyclicity of `gp` is enough.
    Ok(Evaluator::new(gp)?.eval(facts))
}
