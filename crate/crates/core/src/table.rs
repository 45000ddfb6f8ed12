//! Partial-assignment enumeration, Boolean representations and function
//! tables.

use std::fmt;
use std::str::FromStr;

use crate::cnf::{PartialAssignment, SymbolTable, Var};
use crate::error::{parse_error, Error, Result};

/// Largest input set that is enumerated exhaustively (3^12 assignments).
pub const ENUMERATION_LIMIT: usize = 12;

/// Every consistent partial assignment over `vars`, in ternary counting order:
/// each variable cycles unassigned / true / false, the first variable fastest.
pub fn enumerate_assignments(vars: &[Var]) -> Result<Vec<PartialAssignment>> {
    if vars.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            size: vars.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let total = 3usize.pow(vars.len() as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut a = PartialAssignment::empty(vars.iter().copied());
        for &v in vars {
            match code % 3 {
                1 => a.insert(v.pos()).expect("fresh variable"),
                2 => a.insert(v.neg()).expect("fresh variable"),
                _ => {}
            }
            code /= 3;
        }
        out.push(a);
    }
    Ok(out)
}

/// `I_B`: bits `x_1..x_n` then `y_1..y_n` with `x_i = [v_i ∈ I]` and
/// `y_i = [¬v_i ∈ I]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanRepresentation {
    bits: Vec<bool>,
}

impl BooleanRepresentation {
    pub fn new(bits: Vec<bool>) -> Result<BooleanRepresentation> {
        if bits.len() % 2 != 0 {
            return Err(Error::InputLength {
                expected: bits.len() + 1,
                actual: bits.len(),
            });
        }
        Ok(BooleanRepresentation { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn num_vars(&self) -> usize {
        self.bits.len() / 2
    }

    /// No `x_i = y_i = 1`.
    pub fn is_consistent(&self) -> bool {
        let n = self.num_vars();
        (0..n).all(|i| !(self.bits[i] && self.bits[n + i]))
    }

    /// Back to a partial assignment over `order`; `None` if inconsistent.
    pub fn to_assignment(&self, order: &[Var]) -> Result<Option<PartialAssignment>> {
        let n = self.num_vars();
        if order.len() != n {
            return Err(Error::InputLength {
                expected: 2 * order.len(),
                actual: self.bits.len(),
            });
        }
        if !self.is_consistent() {
            return Ok(None);
        }
        let mut a = PartialAssignment::empty(order.iter().copied());
        for (i, &v) in order.iter().enumerate() {
            if self.bits[i] {
                a.insert(v.pos())?;
            } else if self.bits[n + i] {
                a.insert(v.neg())?;
            }
        }
        Ok(Some(a))
    }
}

pub fn boolean_representation(
    assignment: &PartialAssignment,
    order: &[Var],
) -> BooleanRepresentation {
    let mut bits: Vec<bool> = order
        .iter()
        .map(|&v| assignment.contains(v.pos()))
        .collect();
    bits.extend(order.iter().map(|&v| assignment.contains(v.neg())));
    BooleanRepresentation { bits }
}

impl fmt::Display for BooleanRepresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BooleanRepresentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<BooleanRepresentation> {
        let bits = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(parse_error(0, format!("bad bit `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        BooleanRepresentation::new(bits)
    }
}

/// Four-valued result of a propagator seen as a filtering function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilteringOutcome {
    Fail,
    True,
    False,
    Na,
}

/// Result of a matching function; `No < Yes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchingOutcome {
    No,
    Yes,
}

impl MatchingOutcome {
    pub fn from_bool(yes: bool) -> MatchingOutcome {
        if yes {
            MatchingOutcome::Yes
        } else {
            MatchingOutcome::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == MatchingOutcome::Yes
    }
}

impl fmt::Display for FilteringOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilteringOutcome::Fail => "fail",
            FilteringOutcome::True => "true",
            FilteringOutcome::False => "false",
            FilteringOutcome::Na => "na",
        })
    }
}

impl FromStr for FilteringOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<FilteringOutcome> {
        match s.trim() {
            "fail" => Ok(FilteringOutcome::Fail),
            "true" => Ok(FilteringOutcome::True),
            "false" => Ok(FilteringOutcome::False),
            "na" => Ok(FilteringOutcome::Na),
            other => Err(parse_error(0, format!("unknown outcome `{other}`"))),
        }
    }
}

impl fmt::Display for MatchingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchingOutcome::Yes => "yes",
            MatchingOutcome::No => "no",
        })
    }
}

impl FromStr for MatchingOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<MatchingOutcome> {
        match s.trim() {
            "yes" | "1" => Ok(MatchingOutcome::Yes),
            "no" | "0" => Ok(MatchingOutcome::No),
            other => Err(parse_error(0, format!("unknown outcome `{other}`"))),
        }
    }
}

/// A function over partial assignments of an ordered input list, one row
/// per assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table<T> {
    order: Vec<Var>,
    names: SymbolTable,
    rows: Vec<(PartialAssignment, T)>,
}

impl<T: Copy> Table<T> {
    pub fn new(order: Vec<Var>, names: SymbolTable, rows: Vec<(PartialAssignment, T)>) -> Table<T> {
        Table { order, names, rows }
    }

    pub fn order(&self) -> &[Var] {
        &self.order
    }

    pub fn names(&self) -> &SymbolTable {
        &self.names
    }

    pub fn rows(&self) -> &[(PartialAssignment, T)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, assignment: &PartialAssignment) -> Option<T> {
        self.rows
            .iter()
            .find(|(a, _)| a.literals() == assignment.literals())
            .map(|(_, t)| *t)
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Table<U> {
        Table {
            order: self.order.clone(),
            names: self.names.clone(),
            rows: self.rows.iter().map(|(a, t)| (a.clone(), f(*t))).collect(),
        }
    }
}

impl Table<FilteringOutcome> {
    /// The matching function `I ↦ yes iff true`. Errors if any row fails.
    pub fn to_matching(&self) -> Result<Table<MatchingOutcome>> {
        if self.rows.iter().any(|(_, o)| *o == FilteringOutcome::Fail) {
            return Err(Error::ProtocolViolation);
        }
        Ok(self.map(|o| MatchingOutcome::from_bool(o == FilteringOutcome::True)))
    }
}

impl<T: Copy + fmt::Display> Table<T> {
    /// CSV with columns `assignment,boolean,outcome`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["assignment", "boolean", "outcome"])
            .unwrap();
        for (a, t) in &self.rows {
            w.write_record([
                a.format(&self.order, &self.names),
                boolean_representation(a, &self.order).to_string(),
                t.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

impl<T: Copy + FromStr<Err = Error>> Table<T> {
    /// Reads [`Table::to_csv`] output. Variables are named by the first row's
    /// assignment column; the boolean column is checked against it.
    pub fn from_csv(text: &str) -> Result<Table<T>> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_error(1, e.to_string()))?
            .clone();
        let column = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| parse_error(1, format!("missing column `{name}`")))
        };
        let (ca, cb, co) = (
            column("assignment")?,
            column("boolean")?,
            column("outcome")?,
        );
        let mut order: Vec<Var> = Vec::new();
        let mut names = SymbolTable::new();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| parse_error(line, e.to_string()))?;
            let field = |c: usize| record.get(c).unwrap_or("").trim();
            let assignment_text = field(ca);
            if i == 0 {
                for (k, item) in assignment_text
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .enumerate()
                {
                    let name = item.split('=').next().unwrap_or("").trim();
                    let var = Var::new(k as u32 + 1);
                    names.set(var, name);
                    order.push(var);
                }
            }
            let at = |e: Error| match e {
                Error::Parse { message, .. } => parse_error(line, message),
                other => parse_error(line, other.to_string()),
            };
            let universe = order.iter().copied().collect();
            let a = PartialAssignment::parse(assignment_text, &universe, &names).map_err(at)?;
            let bits: BooleanRepresentation = field(cb).parse().map_err(at)?;
            if bits != boolean_representation(&a, &order) {
                return Err(parse_error(
                    line,
                    "boolean column does not match the assignment",
                ));
            }
            rows.push((a, field(co).parse().map_err(at)?));
        }
        Ok(Table { order, names, rows })
    }
}
