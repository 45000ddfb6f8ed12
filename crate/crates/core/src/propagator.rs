//! Propagators `⟨φ, V, s⟩` and the functions they compute.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::cnf::{restrict, Clause, CnfFormula, Literal, PartialAssignment, Var};
use crate::dimacs;
use crate::error::{parse_error, Error, Result};
use crate::propagation::{propagate, PropagationResult};
use crate::reify::{reify_injected, ReifiedFormula};
use crate::table::{enumerate_assignments, FilteringOutcome, MatchingOutcome, Table};

/// A formula with input variables `V` and an output variable `s`.
///
/// `s` must occur in the formula's universe but need not belong to `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Propagator {
    formula: CnfFormula,
    inputs: BTreeSet<Var>,
    output: Var,
}

impl Propagator {
    pub fn new(formula: CnfFormula, inputs: BTreeSet<Var>, output: Var) -> Result<Propagator> {
        if let Some(v) = inputs.iter().find(|v| !formula.variables().contains(v)) {
            return Err(Error::InvalidPropagator(format!(
                "input {} is not a variable of the formula",
                formula.names().name(*v)
            )));
        }
        if !formula.variables().contains(&output) {
            return Err(Error::InvalidPropagator(format!(
                "output {} is not a variable of the formula",
                formula.names().name(output)
            )));
        }
        Ok(Propagator {
            formula,
            inputs,
            output,
        })
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn inputs(&self) -> &BTreeSet<Var> {
        &self.inputs
    }

    pub fn input_order(&self) -> Vec<Var> {
        self.inputs.iter().copied().collect()
    }

    pub fn output(&self) -> Var {
        self.output
    }

    fn check_input(&self, assignment: &PartialAssignment) -> Result<()> {
        match assignment
            .literals()
            .iter()
            .find(|l| !self.inputs.contains(&l.var()))
        {
            Some(l) => Err(Error::UnknownVariable(l.var())),
            None => Ok(()),
        }
    }

    /// Propagation on `φ|_I`.
    pub fn run(&self, assignment: &PartialAssignment) -> Result<PropagationResult> {
        self.check_input(assignment)?;
        Ok(propagate(&restrict(&self.formula, assignment)))
    }

    pub fn to_dimacs(&self) -> String {
        let inputs: Vec<String> = self.inputs.iter().map(|v| v.id().to_string()).collect();
        let extra = [
            format!("inputs {}", inputs.join(" "))
                .trim_end()
                .to_string(),
            format!("output {}", self.output.id()),
        ];
        dimacs::write_with_comments(&self.formula, &extra)
    }

    /// DIMACS with `c inputs <id>...` and `c output <id>` comments.
    pub fn from_dimacs(text: &str) -> Result<Propagator> {
        let file = dimacs::parse(text)?;
        let mut formula = file.to_formula()?;
        let mut inputs = None;
        let mut output = None;
        for (line, comment) in file.comments() {
            let mut parts = comment.split_whitespace();
            let key = parts.next();
            if !matches!(key, Some("inputs" | "output")) {
                continue;
            }
            let ids = parts
                .map(|p| p.parse::<u32>().ok().and_then(Var::try_new))
                .collect::<Option<Vec<Var>>>()
                .ok_or_else(|| parse_error(line, "malformed variable id"))?;
            if ids.iter().any(|v| v.id() > file.num_vars) {
                return Err(parse_error(line, "variable exceeds the header count"));
            }
            if key == Some("inputs") {
                inputs = Some(ids.into_iter().collect::<BTreeSet<Var>>());
            } else {
                match ids.as_slice() {
                    [v] => output = Some(*v),
                    _ => return Err(parse_error(line, "`c output` takes exactly one variable")),
                }
            }
        }
        let inputs = inputs.ok_or_else(|| parse_error(0, "missing `c inputs` line"))?;
        let output = output.ok_or_else(|| parse_error(0, "missing `c output` line"))?;
        for &v in inputs.iter().chain([&output]) {
            formula.declare(v);
        }
        Propagator::new(formula, inputs, output)
    }
}

/// `fail` on bottom, else `true` / `false` when `s` / `¬s` is produced.
pub fn eval_filtering(p: &Propagator, assignment: &PartialAssignment) -> Result<FilteringOutcome> {
    let r = p.run(assignment)?;
    Ok(if r.is_bottom() {
        FilteringOutcome::Fail
    } else if r.produced().contains(&p.output.pos()) {
        FilteringOutcome::True
    } else if r.produced().contains(&p.output.neg()) {
        FilteringOutcome::False
    } else {
        FilteringOutcome::Na
    })
}

/// `yes` iff `s` is produced; bottom is a protocol violation.
pub fn eval_matching(p: &Propagator, assignment: &PartialAssignment) -> Result<MatchingOutcome> {
    let r = p.run(assignment)?;
    if r.is_bottom() {
        return Err(Error::ProtocolViolation);
    }
    Ok(MatchingOutcome::from_bool(
        r.produced().contains(&p.output.pos()),
    ))
}

/// Exhaustive table of [`eval_filtering`] over all `3^|V|` assignments.
pub fn tabulate(p: &Propagator) -> Result<Table<FilteringOutcome>> {
    let order = p.input_order();
    let rows = enumerate_assignments(&order)?
        .into_par_iter()
        .map(|a| eval_filtering(p, &a).map(|o| (a, o)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(order, p.formula.names().clone(), rows))
}

/// `⟨V, φ⟩`, computing `yes` exactly when propagation on `φ|_I` fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NuPropagator {
    inputs: BTreeSet<Var>,
    formula: CnfFormula,
}

impl NuPropagator {
    pub fn new(inputs: BTreeSet<Var>, formula: CnfFormula) -> Result<NuPropagator> {
        if let Some(v) = inputs.iter().find(|v| !formula.variables().contains(v)) {
            return Err(Error::InvalidPropagator(format!(
                "input {} is not a variable of the formula",
                formula.names().name(*v)
            )));
        }
        Ok(NuPropagator { inputs, formula })
    }

    pub fn inputs(&self) -> &BTreeSet<Var> {
        &self.inputs
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }
}

pub fn eval_nu(n: &NuPropagator, assignment: &PartialAssignment) -> Result<MatchingOutcome> {
    if let Some(l) = assignment
        .literals()
        .iter()
        .find(|l| !n.inputs.contains(&l.var()))
    {
        return Err(Error::UnknownVariable(l.var()));
    }
    Ok(MatchingOutcome::from_bool(
        propagate(&restrict(&n.formula, assignment)).is_bottom(),
    ))
}

/// `⟨V, φ ∧ (¬s ∨ z) ∧ (¬s ∨ ¬z)⟩` with `z` fresh.
///
/// A plain unit `(¬s)` is not enough: it can start contrapositive chains
/// that fail although `s` is never produced, as in `(s ∨ a) ∧ (s ∨ ¬a)`.
/// The guarded pair only fires once `s` itself has been produced.
pub fn propagator_to_nu(p: &Propagator) -> NuPropagator {
    let mut formula = p.formula.clone();
    add_guarded_conflict(&mut formula, p.output.pos());
    NuPropagator {
        inputs: p.inputs.clone(),
        formula,
    }
}

fn fresh_var(formula: &CnfFormula) -> Var {
    Var::new(formula.max_var() + 1)
}

/// Adds `(¬trigger ∨ z) ∧ (¬trigger ∨ ¬z)` with `z` fresh, so propagation
/// fails exactly when `trigger` is produced.
fn add_guarded_conflict(formula: &mut CnfFormula, trigger: Literal) {
    let z = fresh_var(formula);
    formula.add_clause(Clause::new([!trigger, z.pos()]));
    formula.add_clause(Clause::new([!trigger, z.neg()]));
}

/// `⟨reif(φ, V) ∧ ⋀_u (¬u_{n+1}^+ ∨ ¬u_{n+1}^- ∨ s), V, s⟩` with `s` fresh.
pub fn nu_to_propagator(n: &NuPropagator) -> Propagator {
    let sigma = reify_injected(&n.formula, &n.inputs).expect("inputs are variables of the formula");
    let s = fresh_var(sigma.formula());
    let formula = sigma.with_conflict_detector(s.pos());
    Propagator::new(formula, n.inputs.clone(), s).expect("inputs and output are declared")
}

/// `⟨ψ, V⟩` with output variables for the three observable behaviours of a
/// propagator. Propagation on `ψ|_I` never fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReifiedPropagator {
    reified: ReifiedFormula,
    formula: CnfFormula,
    inputs: BTreeSet<Var>,
    out_true: Var,
    out_false: Var,
    out_fail: Var,
}

impl ReifiedPropagator {
    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn reified(&self) -> &ReifiedFormula {
        &self.reified
    }

    pub fn inputs(&self) -> &BTreeSet<Var> {
        &self.inputs
    }

    /// `s_{n+1}^+`.
    pub fn out_true(&self) -> Var {
        self.out_true
    }

    /// `s_{n+1}^-`.
    pub fn out_false(&self) -> Var {
        self.out_false
    }

    pub fn out_fail(&self) -> Var {
        self.out_fail
    }

    pub fn with_output(&self, output: Var) -> Propagator {
        Propagator::new(self.formula.clone(), self.inputs.clone(), output)
            .expect("outputs are variables of ψ")
    }
}

pub fn reify_propagator(p: &Propagator) -> ReifiedPropagator {
    let reified =
        reify_injected(&p.formula, &p.inputs).expect("inputs are variables of the formula");
    let out_fail = fresh_var(reified.formula());
    let formula = reified.with_conflict_detector(out_fail.pos());
    let last = reified.index().last_stage();
    ReifiedPropagator {
        out_true: reified.lit(p.output.pos(), last).var(),
        out_false: reified.lit(p.output.neg(), last).var(),
        out_fail,
        formula,
        inputs: p.inputs.clone(),
        reified,
    }
}

/// Propagators for the `true`, `false` and `fail` matching functions of the
/// filtering function computed by `p`.
pub fn filtering_to_matchings(p: &Propagator) -> (Propagator, Propagator, Propagator) {
    let t = fresh_var(&p.formula);
    let mut negated = p.formula.clone();
    negated.add_clause(Clause::new([p.output.pos(), t.pos()]));
    let p_false = Propagator::new(negated, p.inputs.clone(), t).expect("t is declared");
    let rp = reify_propagator(p);
    (p.clone(), p_false, rp.with_output(rp.out_fail))
}

/// Shifts every non-input variable of `f` by `shift`.
fn rename_apart(f: &CnfFormula, inputs: &BTreeSet<Var>, shift: u32) -> CnfFormula {
    let map = |v: Var| {
        if inputs.contains(&v) {
            v
        } else {
            Var::new(v.id() + shift)
        }
    };
    let mut out = CnfFormula::new();
    for c in f.clauses() {
        out.add_clause(
            c.iter()
                .map(|l| Literal::new(map(l.var()), l.is_positive()))
                .collect(),
        );
    }
    for &v in f.variables() {
        out.declare(map(v));
    }
    for &v in inputs {
        if let Some(name) = f.names().explicit(v) {
            out.set_name(v, name);
        }
    }
    out
}

/// Combines propagators for the `true`, `false` and `fail` matching functions
/// into one propagator for the filtering function they describe.
///
/// Each part is reified, renamed apart (inputs shared) and linked through
/// `(¬s_1^true ∨ s) ∧ (¬s_2^true ∨ ¬s)` with `s` fresh. The fail part is
/// wired to a guarded conflict rather than the unit `(¬s_3^true)`, which
/// could fail through contrapositive chains on unassigned inputs.
pub fn matchings_to_filtering(
    p_true: &Propagator,
    p_false: &Propagator,
    p_fail: &Propagator,
) -> Result<Propagator> {
    let inputs = p_true.inputs.clone();
    if p_false.inputs != inputs || p_fail.inputs != inputs {
        return Err(Error::MismatchedInputs);
    }
    let mut combined = CnfFormula::new();
    let mut triggers = Vec::new();
    for (k, p) in [p_true, p_false, p_fail].into_iter().enumerate() {
        let rp = reify_propagator(p);
        let shift = if k == 0 { 0 } else { combined.max_var() };
        let renamed = rename_apart(rp.formula(), &inputs, shift);
        triggers.push(Var::new(rp.out_true.id() + shift));
        combined = combined.conjoin(&renamed);
    }
    let s = fresh_var(&combined);
    combined.add_clause(Clause::new([triggers[0].neg(), s.pos()]));
    combined.add_clause(Clause::new([triggers[1].neg(), s.neg()]));
    add_guarded_conflict(&mut combined, triggers[2].pos());
    for &v in &inputs {
        combined.declare(v);
    }
    Propagator::new(combined, inputs, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::boolean_representation;

    fn v(id: u32) -> Var {
        Var::new(id)
    }

    fn assignment(universe: &[Var], lits: &[i64]) -> PartialAssignment {
        PartialAssignment::from_literals(
            universe.iter().copied(),
            lits.iter().map(|&x| Literal::from_dimacs(x).unwrap()),
        )
        .unwrap()
    }

    /// `⟨(¬v1 ∨ s) ∧ (¬v2 ∨ s), {v1, v2}, s⟩` with s = 3.
    fn first_table_propagator() -> Propagator {
        let mut f = CnfFormula::from_dimacs_clauses(&[&[-1, 3], &[-2, 3]]);
        f.set_name(v(3), "s");
        Propagator::new(f, [v(1), v(2)].into(), v(3)).unwrap()
    }

    #[test]
    fn validation() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2]]);
        assert!(Propagator::new(f.clone(), [v(3)].into(), v(1)).is_err());
        assert!(Propagator::new(f.clone(), [v(1)].into(), v(5)).is_err());
        assert!(Propagator::new(f, [v(1)].into(), v(2)).is_ok());
    }

    #[test]
    fn filtering_examples() {
        let p = first_table_propagator();
        let u = [v(1), v(2)];
        assert_eq!(
            eval_filtering(&p, &assignment(&u, &[1])).unwrap(),
            FilteringOutcome::True
        );
        assert_eq!(
            eval_filtering(&p, &assignment(&u, &[-1, -2])).unwrap(),
            FilteringOutcome::Na
        );
        assert_eq!(
            eval_filtering(&p, &assignment(&u, &[])).unwrap(),
            FilteringOutcome::Na
        );
        let outside = assignment(&[v(1), v(3)], &[3]);
        assert_eq!(
            eval_filtering(&p, &outside),
            Err(Error::UnknownVariable(v(3)))
        );
    }

    #[test]
    fn matching_examples() {
        let p = first_table_propagator();
        let u = [v(1), v(2)];
        assert_eq!(
            eval_matching(&p, &assignment(&u, &[1, 2])).unwrap(),
            MatchingOutcome::Yes
        );
        assert_eq!(
            eval_matching(&p, &assignment(&u, &[-2])).unwrap(),
            MatchingOutcome::No
        );

        let unit = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[2], &[1, 2]]),
            [v(1)].into(),
            v(2),
        )
        .unwrap();
        assert_eq!(
            eval_matching(&unit, &assignment(&[v(1)], &[])).unwrap(),
            MatchingOutcome::Yes
        );

        let clash = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[-1, 2], &[-2]]),
            [v(1)].into(),
            v(2),
        )
        .unwrap();
        assert_eq!(
            eval_matching(&clash, &assignment(&[v(1)], &[1])),
            Err(Error::ProtocolViolation)
        );
    }

    #[test]
    fn first_table() {
        let t = tabulate(&first_table_propagator())
            .unwrap()
            .to_matching()
            .unwrap();
        let got: BTreeSet<(String, String)> = t
            .rows()
            .iter()
            .map(|(a, o)| {
                (
                    boolean_representation(a, t.order()).to_string(),
                    o.to_string(),
                )
            })
            .collect();
        let expected: BTreeSet<(String, String)> = [
            ("0011", "no"),
            ("0110", "yes"),
            ("0010", "no"),
            ("1001", "yes"),
            ("1100", "yes"),
            ("1000", "yes"),
            ("0001", "no"),
            ("0100", "yes"),
            ("0000", "no"),
        ]
        .iter()
        .map(|(b, o)| (b.to_string(), o.to_string()))
        .collect();
        assert_eq!(got, expected);
        assert_eq!(t.len(), 9);
    }

    #[test]
    fn empty_input_set_has_one_row() {
        let p = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[1]]),
            BTreeSet::new(),
            v(1),
        )
        .unwrap();
        let t = tabulate(&p).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.rows()[0].1, FilteringOutcome::True);
    }

    #[test]
    fn nu_examples() {
        let n = NuPropagator::new(
            [v(1), v(2)].into(),
            CnfFormula::from_dimacs_clauses(&[&[-1, 3], &[-2, 3], &[-3]]),
        )
        .unwrap();
        let u = [v(1), v(2)];
        assert_eq!(
            eval_nu(&n, &assignment(&u, &[1])).unwrap(),
            MatchingOutcome::Yes
        );
        assert_eq!(
            eval_nu(&n, &assignment(&u, &[])).unwrap(),
            MatchingOutcome::No
        );
        assert_eq!(
            eval_nu(&n, &assignment(&u, &[-1, -2])).unwrap(),
            MatchingOutcome::No
        );
        assert_eq!(
            propagator_to_nu(&first_table_propagator())
                .formula()
                .num_clauses(),
            4
        );
    }

    #[test]
    fn single_input_nu_conversion() {
        let p = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[-1, 2]]),
            [v(1)].into(),
            v(2),
        )
        .unwrap();
        let n = propagator_to_nu(&p);
        assert_eq!(
            n.formula(),
            &CnfFormula::from_dimacs_clauses(&[&[-1, 2], &[-2, 3], &[-2, -3]])
        );
        for a in enumerate_assignments(&[v(1)]).unwrap() {
            assert_eq!(eval_nu(&n, &a).unwrap(), eval_matching(&p, &a).unwrap());
        }
    }

    #[test]
    fn nu_conversion_ignores_unproduced_output() {
        // (s | a) & (s | -a): nothing is produced on {}, but the unit (-s)
        // would derive both a and -a.
        let f = CnfFormula::from_dimacs_clauses(&[&[1, 2], &[1, -2], &[3]]);
        let p = Propagator::new(f.clone(), [v(3)].into(), v(1)).unwrap();
        let a = assignment(&[v(3)], &[]);
        assert_eq!(eval_matching(&p, &a).unwrap(), MatchingOutcome::No);
        assert_eq!(
            eval_nu(&propagator_to_nu(&p), &a).unwrap(),
            MatchingOutcome::No
        );
        let unit = NuPropagator::new(
            [v(3)].into(),
            f.conjoin(&CnfFormula::from_dimacs_clauses(&[&[-1]])),
        )
        .unwrap();
        assert_eq!(eval_nu(&unit, &a).unwrap(), MatchingOutcome::Yes);
    }

    #[test]
    fn contradiction_becomes_constant_yes() {
        let n = NuPropagator::new(
            [v(1)].into(),
            CnfFormula::from_dimacs_clauses(&[&[1], &[-1]]),
        )
        .unwrap();
        let p = nu_to_propagator(&n);
        for a in enumerate_assignments(&[v(1)]).unwrap() {
            assert_eq!(eval_matching(&p, &a).unwrap(), MatchingOutcome::Yes);
        }
    }

    #[test]
    fn nu_round_trip_on_first_table() {
        let p = first_table_propagator();
        let back = nu_to_propagator(&propagator_to_nu(&p));
        for a in enumerate_assignments(&p.input_order()).unwrap() {
            assert_eq!(
                eval_matching(&back, &a).unwrap(),
                eval_matching(&p, &a).unwrap()
            );
        }
    }

    #[test]
    fn reified_propagator_outputs() {
        // (a) & (-a | b), V = {}, s = b
        let f = CnfFormula::from_dimacs_clauses(&[&[1], &[-1, 2]]);
        let p = Propagator::new(f, BTreeSet::new(), v(2)).unwrap();
        let rp = reify_propagator(&p);
        let r = propagate(rp.formula());
        assert!(r.fixes(rp.out_true().pos()));
        assert_eq!(rp.reified().index().decode(rp.out_true()).unwrap().stage, 3);
        assert!(!r.produced().contains(&rp.out_fail().pos()));

        let clash = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[1], &[-1]]),
            [v(1)].into(),
            v(1),
        )
        .unwrap();
        let rp = reify_propagator(&clash);
        for a in enumerate_assignments(&[v(1)]).unwrap() {
            let r = propagate(&restrict(rp.formula(), &a));
            assert!(!r.is_bottom());
            assert!(r.fixes(rp.out_fail().pos()));
        }
    }

    #[test]
    fn matching_parts() {
        let p = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[-1, -2]]),
            [v(1)].into(),
            v(2),
        )
        .unwrap();
        let (pt, pf, _) = filtering_to_matchings(&p);
        assert_eq!(pt, p);
        assert_eq!(
            eval_matching(&pf, &assignment(&[v(1)], &[1])).unwrap(),
            MatchingOutcome::Yes
        );

        let failing = Propagator::new(
            CnfFormula::from_dimacs_clauses(&[&[1], &[-1, 2], &[-2]]),
            [v(1)].into(),
            v(2),
        )
        .unwrap();
        let (_, _, pfail) = filtering_to_matchings(&failing);
        assert_eq!(
            eval_matching(&pfail, &assignment(&[v(1)], &[])).unwrap(),
            MatchingOutcome::Yes
        );
    }

    #[test]
    fn filtering_round_trip() {
        // s forced true by v1, false by v2, contradiction when both
        let f = CnfFormula::from_dimacs_clauses(&[&[-1, 3], &[-2, -3]]);
        let p = Propagator::new(f, [v(1), v(2)].into(), v(3)).unwrap();
        let (a, b, c) = filtering_to_matchings(&p);
        let q = matchings_to_filtering(&a, &b, &c).unwrap();
        let before = tabulate(&p).unwrap();
        let after = tabulate(&q).unwrap();
        assert_eq!(before.rows(), after.rows());
        assert!(before
            .rows()
            .iter()
            .any(|(_, o)| *o == FilteringOutcome::Fail));
        assert!(before
            .rows()
            .iter()
            .any(|(_, o)| *o == FilteringOutcome::False));
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let p = first_table_propagator();
        let q = Propagator::new(p.formula().clone(), [v(1)].into(), v(3)).unwrap();
        assert_eq!(
            matchings_to_filtering(&p, &q, &p),
            Err(Error::MismatchedInputs)
        );
    }

    #[test]
    fn file_round_trip() {
        let p = first_table_propagator();
        let text = p.to_dimacs();
        assert!(text.contains("c inputs 1 2\nc output 3\n"));
        assert_eq!(Propagator::from_dimacs(&text).unwrap(), p);
        assert!(Propagator::from_dimacs("p cnf 1 1\n1 0\n").is_err());
    }
}
