//! DIMACS CNF reading and writing.
//!
//! Variable names travel as `c var <index> <name>` comments. Other comment
//! lines are kept in order so that richer formats (propagators, reified
//! formulas) can layer their own annotations on top.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::cnf::{default_name, Clause, CnfFormula, Literal, Var};
use crate::error::{parse_error, Result};

/// One logical entry of a DIMACS file, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    /// Text after the leading `c`, trimmed.
    Comment {
        line: usize,
        text: String,
    },
    Clause {
        line: usize,
        clause: Clause,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsFile {
    pub num_vars: u32,
    pub num_clauses: usize,
    pub items: Vec<Item>,
}

impl DimacsFile {
    pub fn comments(&self) -> impl Iterator<Item = (usize, &str)> {
        self.items.iter().filter_map(|it| match it {
            Item::Comment { line, text } => Some((*line, text.as_str())),
            Item::Clause { .. } => None,
        })
    }

    pub fn clauses(&self) -> impl Iterator<Item = &Clause> {
        self.items.iter().filter_map(|it| match it {
            Item::Clause { clause, .. } => Some(clause),
            Item::Comment { .. } => None,
        })
    }

    /// Builds the formula: clauses, `c var` names, and every declared
    /// variable in the universe.
    pub fn to_formula(&self) -> Result<CnfFormula> {
        let mut f = CnfFormula::new();
        for (line, text) in self.comments() {
            let mut parts = text.split_whitespace();
            if parts.next() != Some("var") {
                continue;
            }
            let id = parts
                .next()
                .and_then(|s| s.parse::<u32>().ok())
                .and_then(Var::try_new)
                .ok_or_else(|| parse_error(line, "malformed `c var` line"))?;
            let name = parts
                .next()
                .ok_or_else(|| parse_error(line, "`c var` line without a name"))?;
            if name == default_name(id) {
                f.declare(id);
            } else {
                f.set_name(id, name);
            }
        }
        for c in self.clauses() {
            f.add_clause(c.clone());
        }
        Ok(f)
    }
}

pub fn parse(text: &str) -> Result<DimacsFile> {
    let mut header: Option<(u32, usize, usize)> = None;
    let mut items = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('c') {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                items.push(Item::Comment {
                    line,
                    text: rest.trim().to_string(),
                });
                continue;
            }
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(parse_error(line, "duplicate header"));
            }
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
                return Err(parse_error(line, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = parts[2]
                .parse()
                .map_err(|_| parse_error(line, "bad variable count"))?;
            let clauses = parts[3]
                .parse()
                .map_err(|_| parse_error(line, "bad clause count"))?;
            header = Some((vars, clauses, line));
            continue;
        }
        if header.is_none() {
            return Err(parse_error(line, "clause before the `p cnf` header"));
        }
        if trimmed == "%" {
            break;
        }
        for token in trimmed.split_whitespace() {
            let value: i64 = token
                .parse()
                .map_err(|_| parse_error(line, format!("expected literal, found `{token}`")))?;
            if current.is_empty() {
                current_line = line;
            }
            match Literal::from_dimacs(value) {
                Some(lit) => current.push(lit),
                None if value == 0 => items.push(Item::Clause {
                    line: current_line,
                    clause: Clause::new(current.drain(..)),
                }),
                None => return Err(parse_error(line, format!("literal out of range: {value}"))),
            }
        }
    }
    if !current.is_empty() {
        return Err(parse_error(current_line, "clause not terminated by 0"));
    }
    let (num_vars, num_clauses, header_line) =
        header.ok_or_else(|| parse_error(1, "missing `p cnf` header"))?;
    let found = items
        .iter()
        .filter(|i| matches!(i, Item::Clause { .. }))
        .count();
    if found != num_clauses {
        return Err(parse_error(
            header_line,
            format!("header announces {num_clauses} clauses, found {found}"),
        ));
    }
    for item in &items {
        if let Item::Clause { line, clause } = item {
            if let Some(l) = clause.iter().find(|l| l.var().id() > num_vars) {
                return Err(parse_error(
                    *line,
                    format!("variable {} exceeds the header count {num_vars}", l.var()),
                ));
            }
        }
    }
    Ok(DimacsFile {
        num_vars,
        num_clauses,
        items,
    })
}

pub fn parse_formula(text: &str) -> Result<CnfFormula> {
    parse(text)?.to_formula()
}

/// `c var` lines for every explicitly named variable and for every universe
/// variable that occurs in no clause.
pub(crate) fn name_comments(formula: &CnfFormula) -> Vec<String> {
    let occurring: BTreeSet<Var> = formula
        .clauses()
        .flat_map(|c| c.iter().map(Literal::var))
        .collect();
    formula
        .variables()
        .iter()
        .filter(|v| formula.names().explicit(**v).is_some() || !occurring.contains(v))
        .map(|&v| format!("var {} {}", v.id(), formula.names().name(v)))
        .collect()
}

pub(crate) fn write_header(out: &mut String, num_vars: u32, num_clauses: usize) {
    writeln!(out, "p cnf {num_vars} {num_clauses}").unwrap();
}

pub(crate) fn write_clause(out: &mut String, clause: &Clause) {
    for l in clause.iter() {
        write!(out, "{} ", l.to_dimacs()).unwrap();
    }
    out.push_str("0\n");
}

/// Writes `formula` with `extra` comment lines placed right after the
/// variable-name comments.
pub fn write_with_comments(formula: &CnfFormula, extra: &[String]) -> String {
    let mut out = String::new();
    write_header(&mut out, formula.max_var(), formula.num_clauses());
    for c in name_comments(formula).iter().chain(extra) {
        writeln!(out, "c {c}").unwrap();
    }
    for c in formula.clauses() {
        write_clause(&mut out, c);
    }
    out
}

pub fn write(formula: &CnfFormula) -> String {
    write_with_comments(formula, &[])
}
