//! Lexer and recursive-descent parser for the clause syntax.
//!
//! ```text
//! program  := clause*
//! clause   := atom ( ":-" literal ("," literal)* )? "."
//! literal  := "\+"? atom
//! atom     := ident ( "(" term ("," term)* ")" )?
//! term     := ident | Variable
//! ```
//!
//! `%` starts a comment that runs to the end of the line. The theory parser
//! reuses the same token stream and extends the grammar with `choicespace`
//! blocks and `query` lines.

use std::collections::BTreeMap;
use std::fmt;

use super::syntax::{Atom, Clause, Literal, Program, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Unexpected character or token.
    Syntax,
    /// A relation symbol used with two different arities.
    ArityConflict {
        relation: String,
        first: usize,
        second: usize,
    },
    /// A head variable that does not occur in the body.
    UnsafeVariable { variable: String },
    /// Semantic problem in a theory file (duplicate or conflicting masses, ...).
    Theory,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    Neck,
    Colon,
    Not,
    Comma,
    Period,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Not => f.write_str("`\\+`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Period => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, column, message: String| ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_lowercase() || c.is_ascii_uppercase() {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
                col += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_ascii_uppercase() {
                Tok::Var(word)
            } else {
                Tok::Ident(word)
            }
        } else if c.is_ascii_digit() {
            let start = i;
            let digits = |i: &mut usize, col: &mut usize| {
                while *i < chars.len() && chars[*i].is_ascii_digit() {
                    *i += 1;
                    *col += 1;
                }
            };
            let fraction = |i: &mut usize, col: &mut usize| {
                if *i + 1 < chars.len() && chars[*i] == '.' && chars[*i + 1].is_ascii_digit() {
                    *i += 1;
                    *col += 1;
                    digits(i, col);
                }
            };
            digits(&mut i, &mut col);
            fraction(&mut i, &mut col);
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                col += 1;
                digits(&mut i, &mut col);
                fraction(&mut i, &mut col);
            }
            Tok::Number(chars[start..i].iter().collect())
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                (':', Some('-')) => (Tok::Neck, 2),
                (':', _) => (Tok::Colon, 1),
                ('\\', Some('+')) => (Tok::Not, 2),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Period, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                _ => return Err(syntax(line, col, format!("unexpected character `{c}`"))),
            };
            advance(width, &mut i, &mut col);
            tok
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

/// Token cursor shared by the program and theory parsers.
pub(crate) struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            tokens: tokenize(text)?,
            pos: 0,
            arities: BTreeMap::new(),
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    pub fn span(&self) -> (usize, usize) {
        let t = &self.tokens[self.pos];
        (t.line, t.column)
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if !matches!(t, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        let (line, column) = self.span();
        ParseError {
            line,
            column,
            kind,
            message: message.into(),
        }
    }

    pub fn unexpected(&self, expected: &str) -> ParseError {
        self.error(
            ParseErrorKind::Syntax,
            format!("expected {expected}, found {}", self.peek()),
        )
    }

    pub fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn number(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected("a probability")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.next() {
            Tok::Ident(s) => Ok(Term::Constant(s)),
            Tok::Var(s) => Ok(Term::Variable(s)),
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a term"))
            }
        }
    }

    pub fn atom(&mut self) -> Result<Atom, ParseError> {
        let (line, column) = self.span();
        let relation = self.ident()?;
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        match self.arities.get(&relation) {
            Some(&first) if first != args.len() => {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::ArityConflict {
                        relation: relation.clone(),
                        first,
                        second: args.len(),
                    },
                    message: format!(
                        "relation `{relation}` used with arity {} but earlier with arity {first}",
                        args.len()
                    ),
                })
            }
            Some(_) => {}
            None => {
                self.arities.insert(relation.clone(), args.len());
            }
        }
        Ok(Atom { relation, args })
    }

    pub fn literal(&mut self) -> Result<Literal, ParseError> {
        let positive = if *self.peek() == Tok::Not {
            self.next();
            false
        } else {
            true
        };
        Ok(Literal {
            atom: self.atom()?,
            positive,
        })
    }

    /// Comma-separated literals up to (and consuming) the final period.
    pub fn literals_until_period(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut lits = vec![self.literal()?];
        while *self.peek() == Tok::Comma {
            self.next();
            lits.push(self.literal()?);
        }
        self.expect(Tok::Period)?;
        Ok(lits)
    }

    pub fn clause(&mut self) -> Result<Clause, ParseError> {
        let (line, column) = self.span();
        let head = self.atom()?;
        let body = match self.next() {
            Tok::Period => Vec::new(),
            Tok::Neck => self.literals_until_period()?,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("`.` or `:-`"));
            }
        };
        let clause = Clause { head, body };
        for v in clause.head.variables() {
            if !clause
                .body
                .iter()
                .any(|l| l.atom.variables().any(|b| b == v))
            {
                return Err(ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::UnsafeVariable {
                        variable: v.to_string(),
                    },
                    message: format!("head variable `{v}` does not occur in the clause body"),
                });
            }
        }
        Ok(clause)
    }
}

/// Parses program text into clauses in source order.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    while !p.at_eof() {
        clauses.push(p.clause()?);
    }
    Ok(Program::new(clauses))
}

/// Parses a comma-separated list of literals, with or without a final period.
pub fn parse_literals(text: &str) -> Result<Vec<Literal>, ParseError> {
    let mut p = Parser::new(text)?;
    if p.at_eof() {
        return Ok(Vec::new());
    }
    let mut lits = vec![p.literal()?];
    while *p.peek() == Tok::Comma {
        p.next();
        lits.push(p.literal()?);
    }
    if *p.peek() == Tok::Period {
        p.next();
    }
    if !p.at_eof() {
        return Err(p.unexpected("end of input"));
    }
    Ok(lits)
}
