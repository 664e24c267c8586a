//! `.ccl` theory files.
//!
//! ```text
//! p :- c.
//! p :- r.
//! h :- \+ p, nw.
//! choicespace {
//!   alternative { r: 0.1, nr: 0.9 }
//!   alternative { c: 0.5, nc: 0.5 }
//! }
//! choicespace { alternative { w: 0.2, nw: 0.8 } }
//! query h.
//! ```
//!
//! `choicespace` and `query` are keywords only in these positions; an atom
//! with the same name followed by `.`, `:-` or `(` is read as a clause.

use std::collections::BTreeMap;
use std::fmt;

use super::{Alternative, ChoiceSpace, Query, Theory};
use crate::logic::{Atom, ParseError, ParseErrorKind, Parser, Program, Tok};
use crate::rational::{parse_rational, Rational};

/// A parsed theory file: the theory plus any `query` lines, in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryFile {
    pub theory: Theory,
    pub queries: Vec<Query>,
}

impl fmt::Display for TheoryFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.theory)?;
        for q in &self.queries {
            writeln!(f, "query {q}.")?;
        }
        Ok(())
    }
}

fn is_keyword_use(p: &Parser, keyword: &str) -> bool {
    matches!(p.peek(), Tok::Ident(s) if s == keyword)
        && !matches!(p.peek_at(1), Tok::Period | Tok::Neck | Tok::LParen)
}

/// Parses a `.ccl` file. The result is not validated.
pub fn parse_theory(text: &str) -> Result<TheoryFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    let mut spaces = Vec::new();
    let mut mu: BTreeMap<Atom, Rational> = BTreeMap::new();
    let mut queries = Vec::new();
    while !p.at_eof() {
        if is_keyword_use(&p, "choicespace") {
            p.next();
            spaces.push(choice_space(&mut p, &mut mu)?);
        } else if is_keyword_use(&p, "query") {
            p.next();
            queries.push(Query::new(p.literals_until_period()?));
        } else {
            clauses.push(p.clause()?);
        }
    }
    Ok(TheoryFile {
        theory: Theory::new(Program::new(clauses), spaces, mu),
        queries,
    })
}

fn choice_space(
    p: &mut Parser,
    mu: &mut BTreeMap<Atom, Rational>,
) -> Result<ChoiceSpace, ParseError> {
    p.expect(Tok::LBrace)?;
    let mut alternatives = Vec::new();
    while *p.peek() != Tok::RBrace {
        match p.peek() {
            Tok::Ident(s) if s == "alternative" => {
                p.next();
            }
            _ => return Err(p.unexpected("`alternative` or `}`")),
        }
        p.expect(Tok::LBrace)?;
        let mut atoms = Vec::new();
        while *p.peek() != Tok::RBrace {
            let atom_span = p.span();
            let atom = p.atom()?;
            p.expect(Tok::Colon)?;
            let literal = p.number()?;
            let mass = parse_rational(&literal)
                .map_err(|e| p.error(ParseErrorKind::Syntax, e.to_string()))?;
            if atoms.contains(&atom) {
                return Err(ParseError {
                    line: atom_span.0,
                    column: atom_span.1,
                    kind: ParseErrorKind::Theory,
                    message: format!("atom {atom} listed twice in one alternative"),
                });
            }
            if let Some(previous) = mu.get(&atom) {
                if *previous != mass {
                    return Err(ParseError {
                        line: atom_span.0,
                        column: atom_span.1,
                        kind: ParseErrorKind::Theory,
                        message: format!(
                            "conflicting probabilities {previous} and {mass} for {atom}"
                        ),
                    });
                }
            }
            mu.insert(atom.clone(), mass);
            atoms.push(atom);
            if *p.peek() == Tok::Comma {
                p.next();
            } else if *p.peek() != Tok::RBrace {
                return Err(p.unexpected("`,` or `}`"));
            }
        }
        p.expect(Tok::RBrace)?;
        alternatives.push(Alternative::new(atoms));
    }
    p.expect(Tok::RBrace)?;
    Ok(ChoiceSpace::new(alternatives))
}
