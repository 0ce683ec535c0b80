//! CNF data model and DIMACS I/O.
//!
//! Variables are 0-indexed inside the crate; DIMACS text is 1-indexed. The
//! conversion happens only in [`Lit::from_dimacs`] / [`Lit::to_dimacs`].

use std::fmt::{self, Write as _};
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, 0-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit((self.0 << 1) | (!positive) as u32)
    }

    #[inline]
    pub fn pos(self) -> Lit {
        self.lit(true)
    }

    #[inline]
    pub fn neg(self) -> Lit {
        self.lit(false)
    }
}

/// A literal encoded as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    /// Builds a literal from a nonzero DIMACS integer.
    pub fn from_dimacs(value: i32) -> Option<Lit> {
        if value == 0 {
            return None;
        }
        let var = Var(value.unsigned_abs() - 1);
        Some(var.lit(value > 0))
    }

    pub fn to_dimacs(self) -> i32 {
        let v = (self.var().0 + 1) as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for per-literal tables.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals with no repeats and no complementary pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Removes duplicate literals (keeping first occurrences). Returns `None`
    /// for a tautology.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut out: Vec<Lit> = Vec::new();
        for l in lits {
            if out.contains(&!l) {
                return None;
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Some(Clause { lits: out })
    }

    /// Clause from DIMACS integers; panics on 0 or on a tautology.
    pub fn from_dimacs(values: &[i32]) -> Clause {
        Clause::new(values.iter().map(|&v| Lit::from_dimacs(v).expect("zero literal")))
            .expect("tautological clause")
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }
}

/// An immutable CNF formula.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: invalid token `{token}`")]
    Token { line: usize, token: String },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_vars: usize,
    },
    #[error("last clause is missing its terminating 0")]
    MissingTerminator,
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCount { declared: usize, found: usize },
}

impl Formula {
    /// Builds a formula, checking every variable index against `num_vars`.
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Formula, DimacsError> {
        for c in &clauses {
            for l in c.lits() {
                if l.var().index() >= num_vars {
                    return Err(DimacsError::LiteralOutOfRange {
                        line: 0,
                        literal: l.to_dimacs() as i64,
                        num_vars,
                    });
                }
            }
        }
        Ok(Formula { num_vars, clauses })
    }

    /// Convenience constructor from DIMACS integers. Tautologies are dropped.
    pub fn from_dimacs_clauses(num_vars: usize, clauses: &[Vec<i32>]) -> Result<Formula, DimacsError> {
        let mut out = Vec::with_capacity(clauses.len());
        for c in clauses {
            let lits: Option<Vec<Lit>> = c.iter().map(|&v| Lit::from_dimacs(v)).collect();
            let lits = lits.ok_or(DimacsError::Token {
                line: 0,
                token: "0".into(),
            })?;
            if let Some(clause) = Clause::new(lits) {
                out.push(clause);
            }
        }
        Formula::new(num_vars, out)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Clauses as DIMACS integer lists.
    pub fn to_dimacs_clauses(&self) -> Vec<Vec<i32>> {
        self.clauses.iter().map(Clause::to_dimacs).collect()
    }

    /// Evaluates a complete assignment indexed by variable.
    pub fn is_satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.lits()
                .iter()
                .any(|l| model[l.var().index()] == l.is_positive())
        })
    }

    /// Same formula with one extra clause.
    pub fn with_clause(&self, clause: Clause) -> Formula {
        let mut clauses = self.clauses.clone();
        clauses.push(clause);
        Formula {
            num_vars: self.num_vars,
            clauses,
        }
    }
}

/// Counters for normalizations applied while parsing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseReport {
    pub dropped_tautologies: usize,
    pub removed_duplicate_literals: usize,
}

pub fn parse_dimacs(text: &str) -> Result<Formula, DimacsError> {
    parse_dimacs_with_report(text).map(|(f, _)| f)
}

/// Parses DIMACS CNF. Duplicate literals are merged and tautologies dropped;
/// both still count towards the header's clause total. A line starting with
/// `%` ends the input (SATLIB convention).
pub fn parse_dimacs_with_report(text: &str) -> Result<(Formula, ParseReport), DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut report = ParseReport::default();
    let mut clauses = Vec::new();
    let mut read = 0usize;
    let mut current: Vec<Lit> = Vec::new();
    let mut open = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::Header {
                    line: line_no,
                    reason: "duplicate header".into(),
                });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let value: i64 = tok.parse().map_err(|_| DimacsError::Token {
                line: line_no,
                token: tok.to_string(),
            })?;
            if value == 0 {
                read += 1;
                let before = current.len();
                match Clause::new(current.drain(..)) {
                    Some(c) => {
                        report.removed_duplicate_literals += before - c.len();
                        clauses.push(c);
                    }
                    None => report.dropped_tautologies += 1,
                }
                open = false;
                continue;
            }
            if value.unsigned_abs() as usize > num_vars {
                return Err(DimacsError::LiteralOutOfRange {
                    line: line_no,
                    literal: value,
                    num_vars,
                });
            }
            current.push(Lit::from_dimacs(value as i32).expect("nonzero"));
            open = true;
        }
    }

    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if open {
        return Err(DimacsError::MissingTerminator);
    }
    if read != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: read,
        });
    }
    if report.dropped_tautologies > 0 {
        log::warn!("dropped {} tautological clauses", report.dropped_tautologies);
    }
    Ok((Formula { num_vars, clauses }, report))
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), DimacsError> {
    let err = |reason: &str| DimacsError::Header {
        line: line_no,
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(err("expected `p cnf <vars> <clauses>`"));
    }
    let vars = parts[2].parse().map_err(|_| err("bad variable count"))?;
    let clauses = parts[3].parse().map_err(|_| err("bad clause count"))?;
    Ok((vars, clauses))
}

/// Renders DIMACS CNF. Each line in `comments` is emitted as a `c` line.
pub fn write_dimacs_with_comments(formula: &Formula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars, formula.clauses.len());
    for clause in &formula.clauses {
        for l in clause.lits() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}

pub fn write_dimacs(formula: &Formula) -> String {
    write_dimacs_with_comments(formula, &[])
}
