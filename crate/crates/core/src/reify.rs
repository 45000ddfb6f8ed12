//! Reified counterparts of CNF formulas.
//!
//! For a formula φ over `n` variables, the reified formula σ has one variable
//! `v_i^+` / `v_i^-` per variable `v` of φ and stage `0 ≤ i ≤ n + 1`. Unit
//! propagation on σ fixes `v_i^+` exactly when propagation on φ has fixed `v`
//! within its first `i` stages. σ's own stages are numbered from 0, so the
//! 0-based index of a [`PropagationResult`](crate::PropagationResult) trace
//! of σ *is* the σ stage number.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use crate::cnf::{default_name, Clause, CnfFormula, Literal, Var};
use crate::dimacs;
use crate::error::{parse_error, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(lit: Literal) -> Sign {
        if lit.is_positive() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// `v_i^±`: base variable, stage and polarity tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReifiedVariable {
    pub base: Var,
    pub stage: u32,
    pub sign: Sign,
}

impl ReifiedVariable {
    /// The literal of φ this variable stands for (`v` for plus, `¬v` for minus).
    pub fn literal(self) -> Literal {
        Literal::new(self.base, self.sign == Sign::Plus)
    }

    pub fn name(self, base_name: &str) -> String {
        format!("{}_{}{}", base_name, self.stage, self.sign.symbol())
    }
}

impl fmt::Display for ReifiedVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name(&default_name(self.base)))
    }
}

/// `δ(w)_stage`: `v_stage^+` for `w = v`, `v_stage^-` for `w = ¬v`.
pub fn delta(w: Literal, stage: u32) -> ReifiedVariable {
    ReifiedVariable {
        base: w.var(),
        stage,
        sign: Sign::of(w),
    }
}

/// Bijection between reified variables and fresh identifiers placed after
/// the largest variable of the source formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReifiedIndex {
    bases: Vec<Var>,
    offset: u32,
}

impl ReifiedIndex {
    pub fn new(bases: impl IntoIterator<Item = Var>, offset: u32) -> ReifiedIndex {
        let mut bases: Vec<Var> = bases.into_iter().collect();
        bases.sort_unstable();
        bases.dedup();
        ReifiedIndex { bases, offset }
    }

    /// Number of base variables `n`.
    pub fn n(&self) -> usize {
        self.bases.len()
    }

    /// Highest stage, `n + 1`.
    pub fn last_stage(&self) -> u32 {
        self.bases.len() as u32 + 1
    }

    /// Number of reified variables, `2n(n + 2)`.
    pub fn len(&self) -> usize {
        2 * self.n() * (self.n() + 2)
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bases(&self) -> &[Var] {
        &self.bases
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn id(&self, rv: ReifiedVariable) -> Option<Var> {
        let pos = self.bases.binary_search(&rv.base).ok()?;
        if rv.stage > self.last_stage() {
            return None;
        }
        let slot =
            (pos * (self.n() + 2) + rv.stage as usize) * 2 + (rv.sign == Sign::Minus) as usize;
        Some(Var::new(self.offset + 1 + slot as u32))
    }

    /// Like [`ReifiedIndex::id`], panicking for variables outside the index.
    pub fn var(&self, rv: ReifiedVariable) -> Var {
        self.id(rv)
            .unwrap_or_else(|| panic!("{rv} is not in the reified index"))
    }

    pub fn lit(&self, w: Literal, stage: u32) -> Literal {
        self.var(delta(w, stage)).pos()
    }

    pub fn decode(&self, var: Var) -> Option<ReifiedVariable> {
        let slot = var.id().checked_sub(self.offset + 1)? as usize;
        if slot >= self.len() {
            return None;
        }
        let sign = if slot % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        };
        let cell = slot / 2;
        Some(ReifiedVariable {
            base: self.bases[cell / (self.n() + 2)],
            stage: (cell % (self.n() + 2)) as u32,
            sign,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (ReifiedVariable, Var)> + '_ {
        (0..self.len() as u32).map(move |slot| {
            let var = Var::new(self.offset + 1 + slot);
            (self.decode(var).expect("slot within index"), var)
        })
    }
}

/// Why a clause of σ exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Init0,
    Init1,
    Propagation(u32),
    Deduction(u32),
    Injection,
}

impl Role {
    /// Layer of the clause in the stage decomposition `ψ_0 … ψ_{n+1}`.
    pub fn layer(self) -> u32 {
        match self {
            Role::Init0 => 0,
            Role::Init1 | Role::Injection => 1,
            Role::Propagation(i) | Role::Deduction(i) => i,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Init0 => write!(f, "init0"),
            Role::Init1 => write!(f, "init1"),
            Role::Propagation(i) => write!(f, "prop {i}"),
            Role::Deduction(i) => write!(f, "ded {i}"),
            Role::Injection => write!(f, "inject"),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Role, String> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().unwrap_or("");
        let rank = parts
            .next()
            .map(|r| r.parse::<u32>().map_err(|_| format!("bad rank `{r}`")));
        let role = match (kind, rank) {
            ("init0", None) => Role::Init0,
            ("init1", None) => Role::Init1,
            ("inject", None) => Role::Injection,
            ("prop", Some(r)) => Role::Propagation(r?),
            ("ded", Some(r)) => Role::Deduction(r?),
            _ => return Err(format!("unknown role `{s}`")),
        };
        if parts.next().is_some() {
            return Err(format!("unknown role `{s}`"));
        }
        Ok(role)
    }
}

/// σ together with its index and the role of every emitted clause.
///
/// Clauses are kept exactly as generated (duplicates included, e.g. from
/// tautological source clauses); [`ReifiedFormula::formula`] is the
/// deduplicated CNF.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReifiedFormula {
    source: CnfFormula,
    index: ReifiedIndex,
    injected: BTreeSet<Var>,
    tagged: Vec<(Clause, Role)>,
    formula: CnfFormula,
}

impl ReifiedFormula {
    pub fn source(&self) -> &CnfFormula {
        &self.source
    }

    pub fn index(&self) -> &ReifiedIndex {
        &self.index
    }

    pub fn injected(&self) -> &BTreeSet<Var> {
        &self.injected
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn tagged_clauses(&self) -> &[(Clause, Role)] {
        &self.tagged
    }

    pub fn count(&self, pred: impl Fn(Role) -> bool) -> usize {
        self.tagged.iter().filter(|(_, r)| pred(*r)).count()
    }

    pub fn lit(&self, w: Literal, stage: u32) -> Literal {
        self.index.lit(w, stage)
    }

    /// Clauses of layer `ψ_layer`, in emission order.
    pub fn layer(&self, layer: u32) -> impl Iterator<Item = &(Clause, Role)> {
        self.tagged.iter().filter(move |(_, r)| r.layer() == layer)
    }

    /// Adds `(¬u_{n+1}^+ ∨ ¬u_{n+1}^- ∨ out)` for every variable `u` of φ.
    /// An empty clause in φ is not reified, so it becomes the unit `(out)`.
    pub fn with_conflict_detector(&self, out: Literal) -> CnfFormula {
        let mut f = self.formula.clone();
        if self.source.has_empty_clause() {
            f.add_clause(Clause::unit(out));
        }
        let last = self.index.last_stage();
        for &u in self.index.bases() {
            f.add_clause(Clause::new([
                !self.index.lit(u.pos(), last),
                !self.index.lit(u.neg(), last),
                out,
            ]));
        }
        f.declare(out.var());
        f
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        dimacs::write_header(&mut out, self.formula.max_var(), self.tagged.len());
        for c in dimacs::name_comments(&self.formula) {
            writeln!(out, "c {c}").unwrap();
        }
        for (rv, var) in self.index.iter() {
            writeln!(
                out,
                "c rv {} {} {} {}",
                var.id(),
                rv.base.id(),
                rv.stage,
                rv.sign.symbol()
            )
            .unwrap();
        }
        for (clause, role) in &self.tagged {
            writeln!(out, "c role {role}").unwrap();
            dimacs::write_clause(&mut out, clause);
        }
        out
    }

    /// Reads the format written by [`ReifiedFormula::to_dimacs`]. The source
    /// formula is rebuilt from the initialization and rank-2 deduction clauses.
    pub fn from_dimacs(text: &str) -> Result<ReifiedFormula> {
        let file = dimacs::parse(text)?;
        let formula_names = file.to_formula()?;
        let mut entries: Vec<(Var, ReifiedVariable)> = Vec::new();
        let mut tagged = Vec::new();
        let mut pending: Option<Role> = None;
        for item in &file.items {
            match item {
                dimacs::Item::Comment { line, text } => {
                    if let Some(rest) = text.strip_prefix("rv ") {
                        entries.push(parse_rv(*line, rest)?);
                    } else if let Some(rest) = text.strip_prefix("role ") {
                        pending = Some(rest.parse().map_err(|e: String| parse_error(*line, e))?);
                    }
                }
                dimacs::Item::Clause { line, clause } => {
                    let role = pending
                        .take()
                        .ok_or_else(|| parse_error(*line, "clause without a `c role` tag"))?;
                    tagged.push((clause.clone(), role));
                }
            }
        }
        let bases: BTreeSet<Var> = entries.iter().map(|(_, rv)| rv.base).collect();
        let offset = entries
            .iter()
            .map(|(v, _)| v.id())
            .min()
            .map_or(0, |m| m - 1);
        let index = ReifiedIndex::new(bases.iter().copied(), offset);
        if entries.len() != index.len() {
            return Err(parse_error(0, "incomplete reified index"));
        }
        for (var, rv) in &entries {
            if index.id(*rv) != Some(*var) {
                return Err(parse_error(
                    0,
                    format!("index entry {rv} does not match id {var}"),
                ));
            }
        }

        let mut source = CnfFormula::new();
        for &b in &bases {
            source.declare(b);
            let zero = index.var(ReifiedVariable {
                base: b,
                stage: 0,
                sign: Sign::Plus,
            });
            if let Some(name) = formula_names.names().explicit(zero) {
                if let Some(base_name) = name.strip_suffix("_0+") {
                    if base_name != default_name(b) {
                        source.set_name(b, base_name);
                    }
                }
            }
        }
        let mut injected = BTreeSet::new();
        for (clause, role) in &tagged {
            match role {
                Role::Init0 => {
                    let rv = index
                        .decode(clause.literals()[0].var())
                        .ok_or_else(|| parse_error(0, "init0 clause outside the index"))?;
                    source.add_clause(Clause::unit(rv.literal()));
                }
                Role::Deduction(2) => {
                    let mut q = Vec::new();
                    for l in clause.iter() {
                        let rv = index
                            .decode(l.var())
                            .ok_or_else(|| parse_error(0, "deduction clause outside the index"))?;
                        q.push(if l.is_positive() {
                            rv.literal()
                        } else {
                            !rv.literal()
                        });
                    }
                    source.add_clause(Clause::new(q));
                }
                Role::Injection => {
                    injected.extend(
                        clause
                            .iter()
                            .map(Literal::var)
                            .filter(|v| index.decode(*v).is_none()),
                    );
                }
                _ => {}
            }
        }
        let rebuilt = build(&source, &injected, index.offset)?;
        if rebuilt.tagged != tagged {
            return Err(parse_error(
                0,
                "clauses do not match the reification of the recovered source",
            ));
        }
        Ok(rebuilt)
    }
}

fn parse_rv(line: usize, rest: &str) -> Result<(Var, ReifiedVariable)> {
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let bad = || parse_error(line, "malformed `c rv` line");
    if parts.len() != 4 {
        return Err(bad());
    }
    let id = parts[0]
        .parse()
        .ok()
        .and_then(Var::try_new)
        .ok_or_else(bad)?;
    let base = parts[1]
        .parse()
        .ok()
        .and_then(Var::try_new)
        .ok_or_else(bad)?;
    let stage = parts[2].parse().map_err(|_| bad())?;
    let sign = match parts[3] {
        "+" => Sign::Plus,
        "-" => Sign::Minus,
        _ => return Err(bad()),
    };
    Ok((id, ReifiedVariable { base, stage, sign }))
}

/// `reif(φ)`.
pub fn reify(formula: &CnfFormula) -> ReifiedFormula {
    build(formula, &BTreeSet::new(), formula.max_var()).expect("no injected variables")
}

/// `reif(φ, V)`: `reif(φ)` plus `(¬v ∨ v_1^+) ∧ (v ∨ v_1^-)` for each `v ∈ V`.
pub fn reify_injected(formula: &CnfFormula, inputs: &BTreeSet<Var>) -> Result<ReifiedFormula> {
    build(formula, inputs, formula.max_var())
}

fn build(formula: &CnfFormula, inputs: &BTreeSet<Var>, offset: u32) -> Result<ReifiedFormula> {
    if let Some(v) = inputs.iter().find(|v| !formula.variables().contains(v)) {
        return Err(Error::UnknownVariable(*v));
    }
    let index = ReifiedIndex::new(formula.variables().iter().copied(), offset);
    let last = index.last_stage();
    let mut tagged: Vec<(Clause, Role)> = Vec::new();

    for q in formula.clauses().filter(|c| c.is_unit()) {
        let w = q.literals()[0];
        tagged.push((Clause::unit(index.lit(w, 0)), Role::Init0));
        tagged.push((
            Clause::new([!index.lit(w, 0), index.lit(w, 1)]),
            Role::Init1,
        ));
    }
    for i in 2..=last {
        for &v in index.bases() {
            for w in [v.pos(), v.neg()] {
                tagged.push((
                    Clause::new([!index.lit(w, i - 1), index.lit(w, i)]),
                    Role::Propagation(i),
                ));
            }
        }
    }
    for i in 2..=last {
        for q in formula.clauses().filter(|c| c.len() >= 2) {
            for w in q.iter() {
                let chi = std::iter::once(index.lit(w, i))
                    .chain(q.iter().filter(|&t| t != w).map(|t| !index.lit(!t, i - 1)));
                tagged.push((Clause::new(chi), Role::Deduction(i)));
            }
        }
    }
    for &v in inputs {
        tagged.push((
            Clause::new([v.neg(), index.lit(v.pos(), 1)]),
            Role::Injection,
        ));
        tagged.push((
            Clause::new([v.pos(), index.lit(v.neg(), 1)]),
            Role::Injection,
        ));
    }

    let mut sigma = CnfFormula::new();
    for (rv, var) in index.iter() {
        sigma.set_name(var, rv.name(&formula.names().name(rv.base)));
    }
    for &v in inputs {
        match formula.names().explicit(v) {
            Some(name) => sigma.set_name(v, name),
            None => sigma.declare(v),
        }
    }
    for (c, _) in &tagged {
        sigma.add_clause(c.clone());
    }
    Ok(ReifiedFormula {
        source: formula.clone(),
        index,
        injected: inputs.clone(),
        tagged,
        formula: sigma,
    })
}

/// Failed-literal probe as a single propagation: returns
/// `reif(φ ∧ (l)) ∧ ⋀_v (¬v_{n+1}^+ ∨ ¬v_{n+1}^- ∨ ¬l)` and `¬l`. Unit
/// propagation on the formula produces `¬l` iff propagation on `φ ∧ (l)`
/// ends in bottom.
pub fn failed_literal_formula(formula: &CnfFormula, probe: Literal) -> (CnfFormula, Literal) {
    let mut probed = formula.clone();
    probed.add_clause(Clause::unit(probe));
    let sigma = reify(&probed);
    let mut out = sigma.with_conflict_detector(!probe);
    if let Some(name) = formula.names().explicit(probe.var()) {
        out.set_name(probe.var(), name);
    }
    (out, !probe)
}

/// Groups a σ trace by σ stage: variable → stages at which it was produced
/// (with polarity). Used by the stage-discipline checks.
pub fn stage_map(
    index: &ReifiedIndex,
    trace: &crate::PropagationResult,
) -> BTreeMap<ReifiedVariable, Vec<(usize, bool)>> {
    let mut out: BTreeMap<ReifiedVariable, Vec<(usize, bool)>> = BTreeMap::new();
    for (k, stage) in trace.stages().iter().enumerate() {
        for l in stage {
            if let Some(rv) = index.decode(l.var()) {
                out.entry(rv).or_default().push((k, l.is_positive()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{propagate, propagate_staged};

    fn v(id: u32) -> Var {
        Var::new(id)
    }

    fn a_implies_b() -> CnfFormula {
        // (a) & (-a | b), a = 1, b = 2
        let mut f = CnfFormula::from_dimacs_clauses(&[&[1], &[-1, 2]]);
        f.set_name(v(1), "a");
        f.set_name(v(2), "b");
        f
    }

    #[test]
    fn delta_maps_polarity_to_sign() {
        assert_eq!(
            delta(v(1).pos(), 0),
            ReifiedVariable {
                base: v(1),
                stage: 0,
                sign: Sign::Plus
            }
        );
        assert_eq!(
            delta(v(1).neg(), 1),
            ReifiedVariable {
                base: v(1),
                stage: 1,
                sign: Sign::Minus
            }
        );
        assert_eq!(delta(v(2).pos(), 2).to_string(), "v2_2+");
    }

    #[test]
    fn index_is_a_bijection() {
        let idx = ReifiedIndex::new([v(2), v(5), v(7)], 7);
        assert_eq!(idx.len(), 2 * 3 * 5);
        let ids: BTreeSet<Var> = idx.iter().map(|(_, var)| var).collect();
        assert_eq!(ids.len(), idx.len());
        for (rv, var) in idx.iter() {
            assert_eq!(idx.id(rv), Some(var));
            assert_eq!(idx.decode(var), Some(rv));
        }
        assert_eq!(idx.decode(v(7)), None);
        assert_eq!(idx.decode(v(8 + 30)), None);
    }

    #[test]
    fn empty_formula_reifies_to_nothing() {
        let r = reify(&CnfFormula::new());
        assert_eq!(r.index().len(), 0);
        assert_eq!(r.formula().num_clauses(), 0);
        assert_eq!(r.formula().num_vars(), 0);
    }

    #[test]
    fn single_unit_clause() {
        // reify((a)) with n = 1: stages run 2..=2
        let f = CnfFormula::from_dimacs_clauses(&[&[1]]);
        let r = reify(&f);
        let idx = r.index();
        let rv = |stage, sign| {
            idx.var(ReifiedVariable {
                base: v(1),
                stage,
                sign,
            })
            .pos()
        };
        let expected = vec![
            (Clause::new([rv(0, Sign::Plus)]), Role::Init0),
            (
                Clause::new([!rv(0, Sign::Plus), rv(1, Sign::Plus)]),
                Role::Init1,
            ),
            (
                Clause::new([!rv(1, Sign::Plus), rv(2, Sign::Plus)]),
                Role::Propagation(2),
            ),
            (
                Clause::new([!rv(1, Sign::Minus), rv(2, Sign::Minus)]),
                Role::Propagation(2),
            ),
        ];
        assert_eq!(r.tagged_clauses(), expected.as_slice());
    }

    #[test]
    fn injection_requires_known_variables() {
        let f = a_implies_b();
        assert_eq!(
            reify_injected(&f, &[v(9)].into()),
            Err(Error::UnknownVariable(v(9)))
        );
        assert_eq!(reify_injected(&f, &BTreeSet::new()).unwrap(), reify(&f));
    }

    #[test]
    fn injected_input_reaches_stage_one() {
        // (a | -b | c) with V = {a, b}, I = {a}
        let f = CnfFormula::from_dimacs_clauses(&[&[1, -2, 3]]);
        let r = reify_injected(&f, &[v(1), v(2)].into()).unwrap();
        let mut restricted = r.formula().clone();
        restricted.add_clause(Clause::unit(v(1).pos()));
        let trace = propagate_staged(&restricted);
        let a1 = r.lit(v(1).pos(), 1);
        assert!(trace.stage(1).contains(&a1));
        assert_eq!(propagate(&restricted), trace);
    }

    #[test]
    fn role_text_round_trip() {
        for role in [
            Role::Init0,
            Role::Init1,
            Role::Propagation(3),
            Role::Deduction(2),
            Role::Injection,
        ] {
            assert_eq!(role.to_string().parse::<Role>(), Ok(role));
        }
        assert!("ded".parse::<Role>().is_err());
        assert!("prop 2 3".parse::<Role>().is_err());
    }

    #[test]
    fn dimacs_round_trip_with_injection() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, -2, 3], &[2], &[-1, -3]]);
        let r = reify_injected(&f, &[v(1), v(2)].into()).unwrap();
        let text = r.to_dimacs();
        assert_eq!(ReifiedFormula::from_dimacs(&text).unwrap(), r);

        let named = reify(&a_implies_b());
        assert_eq!(
            ReifiedFormula::from_dimacs(&named.to_dimacs()).unwrap(),
            named
        );
    }

    #[test]
    fn failed_literal_detects_conflict() {
        // (-a) & (a | b), probe -b: φ ∧ (-b) fails, so b is produced
        let f = CnfFormula::from_dimacs_clauses(&[&[-1], &[1, 2]]);
        let (g, target) = failed_literal_formula(&f, v(2).neg());
        assert_eq!(target, v(2).pos());
        assert!(propagate(&g).fixes(target));

        // (a | b), probe a: no conflict
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2]]);
        let (g, target) = failed_literal_formula(&f, v(1).pos());
        assert!(!propagate(&g).produced().contains(&target));
    }
}
