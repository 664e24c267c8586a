use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

/// A constant (lowercase-initial) or a variable (uppercase-initial).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Constant(n) | Term::Variable(n) => n,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A relation symbol applied to terms. Zero-ary atoms are propositions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            relation: relation.into(),
            args,
        }
    }

    pub fn prop(name: impl Into<String>) -> Self {
        Atom::new(name, Vec::new())
    }

    /// Ground atom whose arguments are all constants.
    pub fn ground(relation: impl Into<String>, constants: &[&str]) -> Self {
        Atom::new(
            relation,
            constants.iter().map(|c| Term::constant(*c)).collect(),
        )
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_variable)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter(|t| t.is_variable()).map(Term::name)
    }

    pub(crate) fn substitute(&self, binding: &BTreeMap<&str, &str>) -> Atom {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Variable(v) => Term::Constant(binding[v.as_str()].to_string()),
                c => c.clone(),
            })
            .collect();
        Atom {
            relation: self.relation.clone(),
            args,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.relation)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("\\+ ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// `head :- body.`; an empty body makes the clause a fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn fact(head: Atom) -> Self {
        Clause {
            head,
            body: Vec::new(),
        }
    }

    pub fn rule(head: Atom, body: Vec<Literal>) -> Self {
        Clause { head, body }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(|l| l.atom.is_ground())
    }

    /// Variables in order of first occurrence (head first, then body).
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        let atoms = std::iter::once(&self.head).chain(self.body.iter().map(|l| &l.atom));
        for v in atoms.flat_map(Atom::variables) {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head).chain(self.body.iter().map(|l| &l.atom))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{l}")?;
            }
        }
        f.write_str(".")
    }
}

/// A finite sequence of clauses, kept in source order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Program { clauses }
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    /// All constants mentioned anywhere in the program.
    pub fn constants(&self) -> BTreeSet<String> {
        self.clauses
            .iter()
            .flat_map(Clause::atoms)
            .flat_map(|a| a.args.iter())
            .filter(|t| !t.is_variable())
            .map(|t| t.name().to_string())
            .collect()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Variable-free program together with its Herbrand base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundProgram {
    clauses: Vec<Clause>,
    herbrand_base: BTreeSet<Atom>,
}

impl GroundProgram {
    /// Wraps already-ground clauses. Returns `None` if any clause has a variable.
    pub fn from_clauses(clauses: Vec<Clause>) -> Option<Self> {
        if !clauses.iter().all(Clause::is_ground) {
            return None;
        }
        let herbrand_base = clauses.iter().flat_map(Clause::atoms).cloned().collect();
        Some(GroundProgram {
            clauses,
            herbrand_base,
        })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn herbrand_base(&self) -> &BTreeSet<Atom> {
        &self.herbrand_base
    }

    /// Atoms that head at least one clause.
    pub fn heads(&self) -> BTreeSet<&Atom> {
        self.clauses.iter().map(|c| &c.head).collect()
    }

    /// Clauses grouped by head, each group in source order.
    pub fn rules_by_head(&self) -> BTreeMap<&Atom, Vec<&Clause>> {
        let mut map: BTreeMap<&Atom, Vec<&Clause>> = BTreeMap::new();
        for c in &self.clauses {
            map.entry(&c.head).or_default().push(c);
        }
        map
    }

    /// Adds `a.` for every atom in `facts`.
    pub fn with_facts<'a>(&self, facts: impl IntoIterator<Item = &'a Atom>) -> GroundProgram {
        let mut out = self.clone();
        for a in facts {
            out.herbrand_base.insert(a.clone());
            out.clauses.push(Clause::fact(a.clone()));
        }
        out
    }
}

/// Witness of acyclicity: `level(head) > level(b)` for every rule and body atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelMapping {
    pub(crate) level: BTreeMap<Atom, u32>,
}

impl LevelMapping {
    pub fn level(&self, atom: &Atom) -> Option<u32> {
        self.level.get(atom).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, u32)> {
        self.level.iter().map(|(a, l)| (a, *l))
    }

    /// Atoms sorted by ascending level, ties broken lexicographically.
    pub fn evaluation_order(&self) -> Vec<&Atom> {
        let mut atoms: Vec<_> = self.level.iter().collect();
        atoms.sort_by(|(a, la), (b, lb)| la.cmp(lb).then_with(|| a.cmp(b)));
        atoms.into_iter().map(|(a, _)| a).collect()
    }
}

/// Total truth assignment over a Herbrand base.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation {
    pub(crate) truth: BTreeMap<Atom, bool>,
}

impl Interpretation {
    pub fn get(&self, atom: &Atom) -> Option<bool> {
        self.truth.get(atom).copied()
    }

    pub fn is_true(&self, atom: &Atom) -> bool {
        self.get(atom).unwrap_or(false)
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.truth.iter().filter(|(_, t)| **t).map(|(a, _)| a)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.truth.keys()
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// Truth of a literal; `None` when the atom is outside the interpretation.
    pub fn holds(&self, lit: &Literal) -> Option<bool> {
        self.get(&lit.atom).map(|t| t == lit.positive)
    }
}

impl FromIterator<(Atom, bool)> for Interpretation {
    fn from_iter<I: IntoIterator<Item = (Atom, bool)>>(iter: I) -> Self {
        Interpretation {
            truth: iter.into_iter().collect(),
        }
    }
}
