//! Literals, clauses, CNF formulas and partial assignments.
//!
//! Variables are dense positive integers. Human-readable names live in a
//! [`SymbolTable`] attached to each formula and only matter for I/O.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexSet;

use crate::error::{Error, Result};

/// A propositional variable, identified by a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics on 0; use [`Var::try_new`] for untrusted input.
    pub fn new(id: u32) -> Var {
        assert!(id >= 1, "variable identifiers start at 1");
        Var(id)
    }

    pub fn try_new(id: u32) -> Option<Var> {
        (id >= 1).then_some(Var(id))
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Literal {
        Literal::new(self, true)
    }

    pub fn neg(self) -> Literal {
        Literal::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable or its negation. Ordered by variable, positive before negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    var: Var,
    negative: bool,
}

impl Literal {
    pub fn new(var: Var, positive: bool) -> Literal {
        Literal {
            var,
            negative: !positive,
        }
    }

    /// Parses a DIMACS-style signed integer. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Literal> {
        let id = u32::try_from(value.unsigned_abs()).ok()?;
        Var::try_new(id).map(|v| Literal::new(v, value > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.id());
        if self.negative {
            -id
        } else {
            id
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        !self.negative
    }

    pub fn negate(self) -> Literal {
        Literal {
            var: self.var,
            negative: !self.negative,
        }
    }

    /// Dense index `2 * var + sign`, used for array-backed literal sets.
    pub(crate) fn code(self) -> usize {
        2 * self.var.0 as usize + self.negative as usize
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.negate()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals with set semantics (sorted, no duplicates).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Clause {
        let mut lits: Vec<Literal> = literals.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause(lits)
    }

    pub fn unit(literal: Literal) -> Clause {
        Clause(vec![literal])
    }

    /// Builds a clause from DIMACS integers. Panics on 0.
    pub fn from_dimacs(values: &[i64]) -> Clause {
        Clause::new(
            values
                .iter()
                .map(|&v| Literal::from_dimacs(v).expect("0 is not a literal")),
        )
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.0.len() == 1
    }

    pub fn contains(&self, literal: Literal) -> bool {
        self.0.binary_search(&literal).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<Literal> for Clause {
    fn from_iter<T: IntoIterator<Item = Literal>>(iter: T) -> Self {
        Clause::new(iter)
    }
}

/// Optional names for variables. Unnamed variables display as `v<id>`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: BTreeMap<Var, String>,
    by_name: HashMap<String, Var>,
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        SymbolTable::default()
    }

    pub fn set(&mut self, var: Var, name: impl Into<String>) {
        let name = name.into();
        if let Some(old) = self.names.insert(var, name.clone()) {
            self.by_name.remove(&old);
        }
        self.by_name.insert(name, var);
    }

    pub fn explicit(&self, var: Var) -> Option<&str> {
        self.names.get(&var).map(String::as_str)
    }

    pub fn name(&self, var: Var) -> Cow<'_, str> {
        match self.names.get(&var) {
            Some(n) => Cow::Borrowed(n.as_str()),
            None => Cow::Owned(default_name(var)),
        }
    }

    /// Resolves an explicit name, then the default `v<id>` form of an
    /// unnamed variable.
    pub fn lookup(&self, name: &str) -> Option<Var> {
        if let Some(&v) = self.by_name.get(name) {
            return Some(v);
        }
        let id: u32 = name.strip_prefix('v')?.parse().ok()?;
        let var = Var::try_new(id)?;
        (!self.names.contains_key(&var)).then_some(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &str)> {
        self.names.iter().map(|(v, n)| (*v, n.as_str()))
    }

    pub fn literal(&self, lit: Literal) -> String {
        if lit.is_positive() {
            self.name(lit.var()).into_owned()
        } else {
            format!("-{}", self.name(lit.var()))
        }
    }

    pub(crate) fn merge(&mut self, other: &SymbolTable) {
        for (v, n) in other.iter() {
            self.set(v, n);
        }
    }
}

pub(crate) fn default_name(var: Var) -> String {
    format!("v{}", var.id())
}

/// A set of clauses over a variable universe.
///
/// The universe always contains every variable occurring in a clause and may
/// contain declared variables that occur nowhere.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfFormula {
    clauses: IndexSet<Clause>,
    universe: BTreeSet<Var>,
    names: SymbolTable,
}

impl CnfFormula {
    pub fn new() -> CnfFormula {
        CnfFormula::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> CnfFormula {
        let mut f = CnfFormula::new();
        for c in clauses {
            f.add_clause(c);
        }
        f
    }

    /// Convenience constructor from DIMACS integer lists.
    pub fn from_dimacs_clauses(clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_clauses(clauses.iter().map(|c| Clause::from_dimacs(c)))
    }

    /// Adds a clause; returns false when an equal clause was already present.
    pub fn add_clause(&mut self, clause: Clause) -> bool {
        self.universe.extend(clause.iter().map(Literal::var));
        self.clauses.insert(clause)
    }

    pub fn declare(&mut self, var: Var) {
        self.universe.insert(var);
    }

    pub fn set_name(&mut self, var: Var, name: impl Into<String>) {
        self.universe.insert(var);
        self.names.set(var, name);
    }

    pub fn names(&self) -> &SymbolTable {
        &self.names
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn contains_clause(&self, clause: &Clause) -> bool {
        self.clauses.contains(clause)
    }

    /// `var(φ)`.
    pub fn variables(&self) -> &BTreeSet<Var> {
        &self.universe
    }

    pub fn num_vars(&self) -> usize {
        self.universe.len()
    }

    pub fn max_var(&self) -> u32 {
        self.universe.last().map_or(0, |v| v.id())
    }

    /// Number of literal occurrences.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Clause::len).sum()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// Conjunction; clauses of `other` are appended after ours.
    pub fn conjoin(&self, other: &CnfFormula) -> CnfFormula {
        let mut out = self.clone();
        for c in other.clauses() {
            out.add_clause(c.clone());
        }
        out.universe.extend(other.universe.iter().copied());
        out.names.merge(&other.names);
        out
    }

    pub fn display_clause(&self, clause: &Clause) -> String {
        if clause.is_empty() {
            return "()".to_string();
        }
        let parts: Vec<String> = clause.iter().map(|l| self.names.literal(l)).collect();
        format!("({})", parts.join(" | "))
    }
}

/// `φ|_I`: φ with one unit clause per literal of `I`.
pub fn restrict(formula: &CnfFormula, assignment: &PartialAssignment) -> CnfFormula {
    let mut out = formula.clone();
    for &lit in assignment.literals() {
        out.add_clause(Clause::unit(lit));
    }
    out
}

/// A consistent set of literals over a fixed universe of variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment {
    literals: BTreeSet<Literal>,
    universe: BTreeSet<Var>,
}

impl PartialAssignment {
    pub fn empty(universe: impl IntoIterator<Item = Var>) -> PartialAssignment {
        PartialAssignment {
            literals: BTreeSet::new(),
            universe: universe.into_iter().collect(),
        }
    }

    pub fn from_literals(
        universe: impl IntoIterator<Item = Var>,
        literals: impl IntoIterator<Item = Literal>,
    ) -> Result<PartialAssignment> {
        let mut out = PartialAssignment::empty(universe);
        for lit in literals {
            out.insert(lit)?;
        }
        Ok(out)
    }

    pub fn insert(&mut self, lit: Literal) -> Result<()> {
        if !self.universe.contains(&lit.var()) {
            return Err(Error::UnknownVariable(lit.var()));
        }
        if self.literals.contains(&lit.negate()) {
            return Err(Error::InconsistentAssignment(lit));
        }
        self.literals.insert(lit);
        Ok(())
    }

    pub fn literals(&self) -> &BTreeSet<Literal> {
        &self.literals
    }

    pub fn universe(&self) -> &BTreeSet<Var> {
        &self.universe
    }

    pub fn value(&self, var: Var) -> Option<bool> {
        if self.literals.contains(&var.pos()) {
            Some(true)
        } else if self.literals.contains(&var.neg()) {
            Some(false)
        } else {
            None
        }
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.contains(&lit)
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_subset(&self, other: &PartialAssignment) -> bool {
        self.literals.is_subset(&other.literals)
    }

    /// Renders as `name=1,name=0,name=x` following `order`.
    pub fn format(&self, order: &[Var], names: &SymbolTable) -> String {
        order
            .iter()
            .map(|&v| {
                let val = match self.value(v) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "x",
                };
                format!("{}={}", names.name(v), val)
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses `name=1,name=0,name=x`. Every name must resolve to a variable
    /// of `universe`; unlisted variables stay unassigned.
    pub fn parse(
        text: &str,
        universe: &BTreeSet<Var>,
        names: &SymbolTable,
    ) -> Result<PartialAssignment> {
        let mut out = PartialAssignment::empty(universe.iter().copied());
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::UnknownName(item.to_string()))?;
            let var = names
                .lookup(name.trim())
                .ok_or_else(|| Error::UnknownName(name.trim().to_string()))?;
            match value.trim() {
                "1" => out.insert(var.pos())?,
                "0" => out.insert(var.neg())?,
                "x" | "X" => {
                    if !universe.contains(&var) {
                        return Err(Error::UnknownVariable(var));
                    }
                }
                other => return Err(Error::UnknownName(format!("{name}={other}"))),
            }
        }
        Ok(out)
    }
}
