//! Coherent total choices, possible worlds and world classes.
//!
//! A partial choice for a choice space picks one atom from every alternative
//! subject to coherence: whenever the atom picked for `C` also lies in `C'`,
//! it must be the atom picked for `C'` as well. Coherent selections are
//! determined by their image, so partial choices are keyed by image here.
//! Because distinct choice spaces use disjoint atoms, total choices are the
//! cartesian product of per-space partial choices.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::json;

use crate::logic::{Atom, Evaluator, Interpretation, LogicError};
use crate::theory::{ChoiceSpace, Query, Theory, TheoryError};

/// Default ceiling on the number of materialized worlds.
pub const DEFAULT_WORLD_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("theory has {count} possible worlds, more than the cap of {cap}")]
    TooManyWorlds { count: u128, cap: usize },
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Coherent selection of one atom per alternative of one choice space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialChoice {
    pub space: usize,
    /// `selection[k]` is the atom picked from the space's k-th alternative.
    pub selection: Vec<Atom>,
    pub image: BTreeSet<Atom>,
}

/// One coherent partial choice per choice space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TotalChoice {
    pub parts: Vec<PartialChoice>,
}

impl TotalChoice {
    pub fn image(&self) -> BTreeSet<Atom> {
        self.parts
            .iter()
            .flat_map(|p| p.image.iter().cloned())
            .collect()
    }
}

/// A total choice with the stable model of the program extended by its image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub choice: TotalChoice,
    pub model: Interpretation,
}

impl World {
    /// Conjunctive truth of `query` in this world.
    ///
    /// Positive literals over atoms this world does not know are an error;
    /// negative ones hold.
    pub fn satisfies(&self, query: &Query) -> Result<bool, WorldError> {
        let mut all = true;
        for l in query.literals() {
            match self.model.get(&l.atom) {
                Some(t) => all &= t == l.positive,
                None if l.positive => return Err(TheoryError::UnknownAtom(l.atom.clone()).into()),
                None => {}
            }
        }
        Ok(all)
    }
}

/// The worlds sharing one partial choice on one space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldClass {
    pub partial: PartialChoice,
    /// Indices into [`WorldSpace::worlds`], ascending.
    pub worlds: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct WorldSpace {
    pub worlds: Vec<World>,
    pub classes_by_space: Vec<Vec<WorldClass>>,
    /// `class_of[w][i]` is the index in `classes_by_space[i]` of world `w`'s class.
    pub class_of: Vec<Vec<usize>>,
}

impl WorldSpace {
    /// Builds every world of a validated theory, refusing more than
    /// [`DEFAULT_WORLD_CAP`] worlds.
    pub fn build(theory: &Theory) -> Result<Self, WorldError> {
        Self::build_with_cap(theory, DEFAULT_WORLD_CAP)
    }

    pub fn build_with_cap(theory: &Theory, cap: usize) -> Result<Self, WorldError> {
        theory.ensure_valid()?;
        let per_space: Vec<Vec<PartialChoice>> = theory
            .spaces()
            .iter()
            .enumerate()
            .map(|(i, s)| partial_choices(i, s))
            .collect();
        let count = per_space.iter().map(|p| p.len() as u128).product::<u128>();
        if count > cap as u128 {
            return Err(WorldError::TooManyWorlds { count, cap });
        }
        let evaluator = Evaluator::new(&theory.ground_program())?;
        let base = theory.herbrand_base();

        let mut worlds = Vec::with_capacity(count as usize);
        let mut class_of = Vec::with_capacity(count as usize);
        for idx in product_indices(&per_space.iter().map(Vec::len).collect::<Vec<_>>()) {
            let parts: Vec<PartialChoice> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| per_space[i][j].clone())
                .collect();
            let choice = TotalChoice { parts };
            let image = choice.image();
            let mut model = evaluator.eval(&image);
            // atomic choices left unselected are false in this world
            for a in &base {
                model.truth.entry(a.clone()).or_insert(false);
            }
            worlds.push(World { choice, model });
            class_of.push(idx);
        }

        let classes_by_space = per_space
            .into_iter()
            .enumerate()
            .map(|(i, partials)| {
                let mut classes: Vec<WorldClass> = partials
                    .into_iter()
                    .map(|partial| WorldClass {
                        partial,
                        worlds: Vec::new(),
                    })
                    .collect();
                for (w, idx) in class_of.iter().enumerate() {
                    classes[idx[i]].worlds.push(w);
                }
                classes
            })
            .collect();
        Ok(WorldSpace {
            worlds,
            classes_by_space,
            class_of,
        })
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    /// Indices of the worlds satisfying `query`.
    pub fn satisfying(&self, query: &Query) -> Result<Vec<usize>, WorldError> {
        let mut out = Vec::new();
        for (i, w) in self.worlds.iter().enumerate() {
            if w.satisfies(query)? {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Plain-text dump: one column per world, then one block per space.
    pub fn to_table(&self, theory: &Theory) -> String {
        let mut out = String::new();
        let mut atoms: Vec<Atom> = theory.herbrand_base().into_iter().collect();
        atoms.sort();
        let width = atoms
            .iter()
            .map(|a| a.to_string().len())
            .max()
            .unwrap_or(1)
            .max(5);
        let _ = write!(out, "{:width$}", "");
        for i in 0..self.worlds.len() {
            let _ = write!(out, " {:>4}", format!("w{}", i + 1));
        }
        out.push('\n');
        for a in &atoms {
            let _ = write!(out, "{:width$}", a.to_string());
            for w in &self.worlds {
                let _ = write!(out, " {:>4}", if w.model.is_true(a) { "t" } else { "f" });
            }
            out.push('\n');
        }
        for (i, classes) in self.classes_by_space.iter().enumerate() {
            let _ = writeln!(out, "\nchoice space {}:", i + 1);
            for (j, c) in classes.iter().enumerate() {
                let image: Vec<String> = c.partial.image.iter().map(ToString::to_string).collect();
                let members: Vec<String> = c.worlds.iter().map(|w| format!("w{}", w + 1)).collect();
                let _ = writeln!(
                    out,
                    "  E({},{}) = {{{}}}  image {{{}}}",
                    i + 1,
                    j + 1,
                    members.join(", "),
                    image.join(", ")
                );
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let worlds: Vec<_> = self
            .worlds
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let choice: Vec<String> =
                    w.choice.image().iter().map(ToString::to_string).collect();
                let true_atoms: Vec<String> =
                    w.model.true_atoms().map(ToString::to_string).collect();
                json!({ "index": i + 1, "choice": choice, "true": true_atoms })
            })
            .collect();
        let spaces: Vec<_> = self
            .classes_by_space
            .iter()
            .map(|classes| {
                classes
                    .iter()
                    .map(|c| {
                        let image: Vec<String> =
                            c.partial.image.iter().map(ToString::to_string).collect();
                        let members: Vec<usize> = c.worlds.iter().map(|w| w + 1).collect();
                        json!({ "image": image, "worlds": members })
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        json!({ "worlds": worlds, "classes": spaces })
    }
}

/// All coherent total choices in canonical order (first space most significant).
pub fn enumerate_total_choices(theory: &Theory) -> Vec<TotalChoice> {
    let per_space: Vec<Vec<PartialChoice>> = theory
        .spaces()
        .iter()
        .enumerate()
        .map(|(i, s)| partial_choices(i, s))
        .collect();
    product_indices(&per_space.iter().map(Vec::len).collect::<Vec<_>>())
        .map(|idx| TotalChoice {
            parts: idx
                .iter()
                .enumerate()
                .map(|(i, &j)| per_space[i][j].clone())
                .collect(),
        })
        .collect()
}

/// Coherent partial choices of one space, by backtracking over alternatives
/// in order and atoms in lexicographic order.
pub fn partial_choices(space_index: usize, space: &ChoiceSpace) -> Vec<PartialChoice> {
    let alts = space.alternatives();
    let mut out = Vec::new();
    let mut selection: Vec<&Atom> = Vec::with_capacity(alts.len());
    fn go<'a>(
        k: usize,
        alts: &'a [crate::theory::Alternative],
        selection: &mut Vec<&'a Atom>,
        out: &mut Vec<PartialChoice>,
        space_index: usize,
    ) {
        if k == alts.len() {
            out.push(PartialChoice {
                space: space_index,
                selection: selection.iter().map(|a| (*a).clone()).collect(),
                image: selection.iter().map(|a| (*a).clone()).collect(),
            });
            return;
        }
        for a in alts[k].atoms() {
            let coherent = selection.iter().zip(alts).all(|(&b, prev)| {
                (!prev.contains(a) || a == b) && (!alts[k].contains(b) || a == b)
            });
            if coherent {
                selection.push(a);
                go(k + 1, alts, selection, out, space_index);
                selection.pop();
            }
        }
    }
    go(0, alts, &mut selection, &mut out, space_index);
    out
}

/// Mixed-radix counter over `sizes`, last position fastest. One empty tuple
/// when `sizes` is empty; nothing when any size is zero.
fn product_indices(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let mut next = if sizes.contains(&0) {
        None
    } else {
        Some(vec![0usize; sizes.len()])
    };
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        for k in (0..sizes.len()).rev() {
            succ[k] += 1;
            if succ[k] < sizes[k] {
                next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    })
}
