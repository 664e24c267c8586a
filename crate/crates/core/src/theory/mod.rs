//! Credal choice theories: a program, a family of choice spaces and a mass
//! assignment on atomic choices.
//!
//! Alternatives inside one choice space may share atoms and their selections
//! are not assumed independent. Distinct choice spaces must use disjoint
//! atoms. A theory whose choice spaces each hold a single alternative is an
//! independent choice logic theory.

mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::logic::{self, Atom, Clause, GroundProgram, Literal, LogicError, Program};
use crate::rational::{Pretty, Rational};

pub use parse::{parse_theory, TheoryFile};

/// A non-empty set of ground atoms from which exactly one is selected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alternative {
    atoms: Vec<Atom>,
}

impl Alternative {
    /// Keeps the given atom order (it fixes the canonical world order) and
    /// drops repeated atoms.
    pub fn new(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let mut out: Vec<Atom> = Vec::new();
        for a in atoms {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        Alternative { atoms: out }
    }

    pub fn props(names: &[&str]) -> Self {
        Alternative::new(names.iter().map(|n| Atom::prop(*n)))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// A set of possibly overlapping, possibly dependent alternatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChoiceSpace {
    alternatives: Vec<Alternative>,
}

impl ChoiceSpace {
    pub fn new(alternatives: Vec<Alternative>) -> Self {
        ChoiceSpace { alternatives }
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    /// Union of the alternatives.
    pub fn atomic_choices(&self) -> BTreeSet<Atom> {
        self.alternatives
            .iter()
            .flat_map(|c| c.atoms.iter().cloned())
            .collect()
    }
}

/// Ground literals read as a conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Query {
    literals: Vec<Literal>,
}

impl Query {
    /// Duplicate literals are dropped; order is otherwise kept.
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Self {
        let mut out: Vec<Literal> = Vec::new();
        for l in literals {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Query { literals: out }
    }

    pub fn parse(text: &str) -> Result<Self, TheoryError> {
        Ok(Query::new(logic::parse_literals(text)?))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// One broken theory invariant. Spaces are reported 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyAlternative {
        space: usize,
    },
    NonGroundChoice {
        atom: Atom,
    },
    MissingMass {
        atom: Atom,
    },
    MassOutOfRange {
        atom: Atom,
        mass: Rational,
    },
    UnusedMass {
        atom: Atom,
    },
    NotNormalized {
        space: usize,
        alternative: Alternative,
        sum: Rational,
    },
    ChoiceIsHead {
        atom: Atom,
        clause: Clause,
    },
    SharedAcrossSpaces {
        atom: Atom,
        first: usize,
        second: usize,
    },
    OverlappingAlternatives {
        first: Alternative,
        second: Alternative,
    },
    Cyclic {
        cycle: Vec<Atom>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlternative { space } => {
                write!(f, "choice space {space} has an empty alternative")
            }
            Violation::NonGroundChoice { atom } => write!(f, "atomic choice {atom} is not ground"),
            Violation::MissingMass { atom } => write!(f, "atomic choice {atom} has no probability"),
            Violation::MassOutOfRange { atom, mass } => {
                write!(
                    f,
                    "probability of {atom} is {} outside [0, 1]",
                    Pretty(mass)
                )
            }
            Violation::UnusedMass { atom } => {
                write!(
                    f,
                    "probability given for {atom}, which is not an atomic choice"
                )
            }
            Violation::NotNormalized {
                space,
                alternative,
                sum,
            } => write!(
                f,
                "alternative {alternative} in choice space {space}: alternative mass sum {} ≠ 1",
                Pretty(sum)
            ),
            Violation::ChoiceIsHead { atom, clause } => {
                write!(
                    f,
                    "atomic choice {atom} unifies with the head of `{clause}`"
                )
            }
            Violation::SharedAcrossSpaces {
                atom,
                first,
                second,
            } => {
                write!(
                    f,
                    "atomic choice {atom} appears in choice spaces {first} and {second}"
                )
            }
            Violation::OverlappingAlternatives { first, second } => {
                write!(
                    f,
                    "independent alternatives {first} and {second} share atoms"
                )
            }
            Violation::Cyclic { cycle } => write!(
                f,
                "{}",
                LogicError::Cyclic {
                    cycle: cycle.clone()
                }
            ),
        }
    }
}

/// Result of [`Theory::validate`]; empty means the theory is well formed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error(transparent)]
    Parse(#[from] logic::ParseError),
    #[error("invalid theory:\n{0}")]
    Invalid(ValidationReport),
    #[error("choice space index {index} out of range (theory has {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("query atom {0} is not in the Herbrand base")]
    UnknownAtom(Atom),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// A credal choice theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    program: Program,
    spaces: Vec<ChoiceSpace>,
    mu: BTreeMap<Atom, Rational>,
}

impl Theory {
    /// Assembles a theory without checking it; see [`Theory::validate`].
    pub fn new(program: Program, spaces: Vec<ChoiceSpace>, mu: BTreeMap<Atom, Rational>) -> Self {
        Theory {
            program,
            spaces,
            mu,
        }
    }

    /// Assembles and validates in one step.
    pub fn validated(
        program: Program,
        spaces: Vec<ChoiceSpace>,
        mu: BTreeMap<Atom, Rational>,
    ) -> Result<Self, TheoryError> {
        let t = Theory::new(program, spaces, mu);
        t.ensure_valid()?;
        Ok(t)
    }

    /// ICL theory: one singleton choice space per alternative. Alternatives
    /// must be pairwise disjoint.
    pub fn from_icl(
        program: Program,
        alternatives: Vec<Alternative>,
        mu: BTreeMap<Atom, Rational>,
    ) -> Result<Self, TheoryError> {
        let mut report = ValidationReport::default();
        for (i, a) in alternatives.iter().enumerate() {
            for b in &alternatives[i + 1..] {
                if a.atoms.iter().any(|x| b.contains(x)) {
                    report.violations.push(Violation::OverlappingAlternatives {
                        first: a.clone(),
                        second: b.clone(),
                    });
                }
            }
        }
        let spaces = alternatives
            .into_iter()
            .map(|c| ChoiceSpace::new(vec![c]))
            .collect();
        let t = Theory::new(program, spaces, mu);
        report.violations.extend(t.validate().violations);
        if report.is_ok() {
            Ok(t)
        } else {
            Err(TheoryError::Invalid(report))
        }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn spaces(&self) -> &[ChoiceSpace] {
        &self.spaces
    }

    pub fn mu(&self) -> &BTreeMap<Atom, Rational> {
        &self.mu
    }

    pub fn mass(&self, atom: &Atom) -> Option<&Rational> {
        self.mu.get(atom)
    }

    /// Every atomic choice of every space.
    pub fn atomic_choices(&self) -> BTreeSet<Atom> {
        self.spaces
            .iter()
            .flat_map(ChoiceSpace::atomic_choices)
            .collect()
    }

    /// True when every choice space consists of one alternative.
    pub fn is_icl(&self) -> bool {
        self.spaces.iter().all(|s| s.alternatives.len() == 1)
    }

    /// Constants of the program and of the atomic choices.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = self.program.constants();
        for a in self.atomic_choices() {
            out.extend(a.args.iter().map(|t| t.name().to_string()));
        }
        out
    }

    pub fn ground_program(&self) -> GroundProgram {
        logic::ground(&self.program, &self.constants())
    }

    /// Ground program atoms plus atomic choices.
    pub fn herbrand_base(&self) -> BTreeSet<Atom> {
        let mut base = self.ground_program().herbrand_base().clone();
        base.extend(self.atomic_choices());
        base
    }

    /// Rejects queries whose positive literals mention unknown atoms.
    pub fn check_query(&self, query: &Query) -> Result<(), TheoryError> {
        let base = self.herbrand_base();
        for l in query.literals() {
            if l.positive && !base.contains(&l.atom) {
                return Err(TheoryError::UnknownAtom(l.atom.clone()));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let gp = self.ground_program();
        if let Err(LogicError::Cyclic { cycle }) = logic::check_acyclic(&gp) {
            v.push(Violation::Cyclic { cycle });
        }
        let mut owner: BTreeMap<&Atom, usize> = BTreeMap::new();
        for (si, space) in self.spaces.iter().enumerate() {
            let sn = si + 1;
            for alt in &space.alternatives {
                if alt.is_empty() {
                    v.push(Violation::EmptyAlternative { space: sn });
                    continue;
                }
                let mut sum = Rational::zero();
                let mut complete = true;
                for a in alt.atoms() {
                    match self.mu.get(a) {
                        Some(m) => sum += m,
                        None => complete = false,
                    }
                }
                if complete && !sum.is_one() {
                    v.push(Violation::NotNormalized {
                        space: sn,
                        alternative: alt.clone(),
                        sum,
                    });
                }
            }
            for a in space.atomic_choices() {
                if let Some(&first) = owner.get(&a) {
                    v.push(Violation::SharedAcrossSpaces {
                        atom: a.clone(),
                        first,
                        second: sn,
                    });
                }
            }
            for alt in &space.alternatives {
                for a in alt.atoms() {
                    owner.entry(a).or_insert(sn);
                }
            }
        }
        for atom in owner.keys() {
            if !atom.is_ground() {
                v.push(Violation::NonGroundChoice {
                    atom: (*atom).clone(),
                });
            }
            match self.mu.get(*atom) {
                None => v.push(Violation::MissingMass {
                    atom: (*atom).clone(),
                }),
                Some(m) if *m < Rational::zero() || *m > Rational::one() => {
                    v.push(Violation::MassOutOfRange {
                        atom: (*atom).clone(),
                        mass: m.clone(),
                    })
                }
                Some(_) => {}
            }
            // Choices are ground, so unifying with a head means being one of
            // the head's ground instances.
            if let Some(c) = gp.clauses().iter().find(|c| &c.head == *atom) {
                let source = self
                    .program
                    .clauses
                    .iter()
                    .find(|sc| {
                        sc.head.relation == c.head.relation && sc.head.arity() == c.head.arity()
                    })
                    .unwrap_or(c);
                v.push(Violation::ChoiceIsHead {
                    atom: (*atom).clone(),
                    clause: source.clone(),
                });
            }
        }
        for atom in self.mu.keys() {
            if !owner.contains_key(atom) {
                v.push(Violation::UnusedMass { atom: atom.clone() });
            }
        }
        ValidationReport { violations: v }
    }

    pub fn ensure_valid(&self) -> Result<(), TheoryError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(TheoryError::Invalid(report))
        }
    }

    /// Replaces the listed choice spaces (0-based) by their union, placed at
    /// the position of the smallest index. Other spaces keep their order.
    pub fn merge_spaces(&self, indices: &[usize]) -> Result<Theory, TheoryError> {
        let len = self.spaces.len();
        if let Some(&index) = indices.iter().find(|&&i| i >= len) {
            return Err(TheoryError::IndexOutOfRange { index, len });
        }
        let chosen: BTreeSet<usize> = indices.iter().copied().collect();
        let Some(&target) = chosen.iter().next() else {
            return Ok(self.clone());
        };
        let mut spaces = Vec::with_capacity(len);
        for (i, s) in self.spaces.iter().enumerate() {
            if i == target {
                let merged = chosen
                    .iter()
                    .flat_map(|&j| self.spaces[j].alternatives.iter().cloned())
                    .collect();
                spaces.push(ChoiceSpace::new(merged));
            } else if !chosen.contains(&i) {
                spaces.push(s.clone());
            }
        }
        Ok(Theory {
            program: self.program.clone(),
            spaces,
            mu: self.mu.clone(),
        })
    }

    /// Merges every space into one.
    pub fn merge_all(&self) -> Theory {
        let all: Vec<usize> = (0..self.spaces.len()).collect();
        self.merge_spaces(&all).expect("indices are in range")
    }

    /// Same theory with extra clauses appended to the program.
    pub fn with_clauses(&self, clauses: impl IntoIterator<Item = Clause>) -> Theory {
        let mut t = self.clone();
        t.program.clauses.extend(clauses);
        t
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.program)?;
        for space in &self.spaces {
            writeln!(f, "choicespace {{")?;
            for alt in &space.alternatives {
                f.write_str("  alternative {")?;
                for (i, a) in alt.atoms().iter().enumerate() {
                    let sep = if i == 0 { " " } else { ", " };
                    match self.mu.get(a) {
                        Some(m) => write!(f, "{sep}{a}: {}", Pretty(m))?,
                        None => write!(f, "{sep}{a}: 0")?,
                    }
                }
                writeln!(f, " }}")?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
