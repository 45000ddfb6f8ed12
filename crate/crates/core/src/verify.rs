//! Brute-force oracles, seeded instance generators and the property suites.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::index::sample;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate};
use crate::cnf::{restrict, Clause, CnfFormula, Literal, PartialAssignment, SymbolTable, Var};
use crate::error::{Error, Result};
use crate::propagation::{propagate, propagate_staged, propagate_standard};
use crate::propagator::{
    eval_filtering, eval_matching, eval_nu, filtering_to_matchings, matchings_to_filtering,
    nu_to_propagator, propagator_to_nu, reify_propagator, tabulate, NuPropagator, Propagator,
};
use crate::reify::{failed_literal_formula, reify, reify_injected, Role};
use crate::table::{boolean_representation, FilteringOutcome, MatchingOutcome, Table};
use crate::translate::{circuit_to_propagator, propagator_to_circuit};

pub use crate::table::enumerate_assignments;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    MonotonicityViolation,
    EquivalenceMismatch,
    ProtocolViolation,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Witness::MonotonicityViolation => "monotonicity-violation",
            Witness::EquivalenceMismatch => "equivalence-mismatch",
            Witness::ProtocolViolation => "protocol-violation",
        })
    }
}

/// Two assignments and what was observed on each. For a monotonicity
/// violation `first ⊆ second` with `yes` on `first` and `no` on `second`;
/// for a mismatch both are the same assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub first: PartialAssignment,
    pub second: PartialAssignment,
    pub witness: Witness,
    pub first_outcome: String,
    pub second_outcome: String,
}

impl Counterexample {
    pub fn describe(&self, names: &SymbolTable) -> String {
        let set = |a: &PartialAssignment| {
            let lits: Vec<String> = a.literals().iter().map(|&l| names.literal(l)).collect();
            format!("{{{}}}", lits.join(","))
        };
        format!(
            "{} I={} ({}) J={} ({})",
            self.witness,
            set(&self.first),
            self.first_outcome,
            set(&self.second),
            self.second_outcome
        )
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe(&SymbolTable::new()))
    }
}

/// Looks for `I ⊆ J` with `f(I) = yes` and `f(J) = no`, returning one with the
/// fewest added literals (earliest in table order on ties).
pub fn check_monotone(table: &Table<MatchingOutcome>) -> Option<Counterexample> {
    let rows = table.rows();
    let position: HashMap<&BTreeSet<Literal>, usize> = rows
        .iter()
        .enumerate()
        .map(|(k, (a, _))| (a.literals(), k))
        .collect();
    let violation = |i: usize, j: usize| Counterexample {
        first: rows[i].0.clone(),
        second: rows[j].0.clone(),
        witness: Witness::MonotonicityViolation,
        first_outcome: rows[i].1.to_string(),
        second_outcome: rows[j].1.to_string(),
    };
    let complete =
        rows.len() == 3usize.pow(table.order().len() as u32) && position.len() == rows.len();
    if complete {
        // On the full lattice a violating pair exists iff one exists between
        // neighbours, which are also the minimal ones.
        let mut best: Option<(usize, usize)> = None;
        for (i, (a, o)) in rows.iter().enumerate() {
            if !o.is_yes() {
                continue;
            }
            for &v in table.order().iter().filter(|v| a.value(**v).is_none()) {
                for lit in [v.pos(), v.neg()] {
                    let mut bigger = a.literals().clone();
                    bigger.insert(lit);
                    let j = position[&bigger];
                    if !rows[j].1.is_yes() && best.is_none_or(|(bi, bj)| (i, j) < (bi, bj)) {
                        best = Some((i, j));
                    }
                }
            }
            if best.is_some() {
                break;
            }
        }
        return best.map(|(i, j)| violation(i, j));
    }
    let mut best: Option<(usize, usize, usize)> = None;
    for (i, (a, o)) in rows.iter().enumerate() {
        if !o.is_yes() {
            continue;
        }
        for (j, (b, p)) in rows.iter().enumerate() {
            if p.is_yes() || !a.is_subset(b) {
                continue;
            }
            let gap = b.len() - a.len();
            if best.is_none_or(|(g, bi, bj)| (gap, i, j) < (g, bi, bj)) {
                best = Some((gap, i, j));
            }
        }
    }
    best.map(|(_, i, j)| violation(i, j))
}

/// Compares `eval_matching(p, I)` with `c(I_B)` over every `I`.
pub fn check_equiv_propagator_circuit(
    p: &Propagator,
    c: &Circuit,
) -> Result<Option<Counterexample>> {
    let order = p.input_order();
    if c.inputs().len() != 2 * order.len() {
        return Err(Error::InputLength {
            expected: 2 * order.len(),
            actual: c.inputs().len(),
        });
    }
    let found = enumerate_assignments(&order)?
        .into_par_iter()
        .find_map_first(|a| {
            let bits = boolean_representation(&a, &order);
            let value = c.evaluate(bits.bits()).expect("length checked");
            let circuit_out = if value { "1" } else { "0" };
            let (witness, got) = match eval_matching(p, &a) {
                Err(_) => (Witness::ProtocolViolation, "bottom".to_string()),
                Ok(o) if o.is_yes() != value => (Witness::EquivalenceMismatch, o.to_string()),
                Ok(_) => return None,
            };
            Some(Counterexample {
                first: a.clone(),
                second: a,
                witness,
                first_outcome: got,
                second_outcome: circuit_out.to_string(),
            })
        });
    Ok(found)
}

/// `n` variables (all declared), `k` clauses of `1..=min(maxlen, n)`
/// distinct variables with random signs.
pub fn random_cnf(n: usize, k: usize, maxlen: usize, seed: u64) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = CnfFormula::new();
    for id in 1..=n as u32 {
        f.declare(Var::new(id));
    }
    let width = maxlen.min(n);
    if width == 0 {
        return f;
    }
    for _ in 0..k {
        let len = rng.random_range(1..=width);
        let clause = sample(&mut rng, n, len)
            .into_iter()
            .map(|i| Literal::new(Var::new(i as u32 + 1), rng.random_bool(0.5)))
            .collect();
        f.add_clause(clause);
    }
    f
}

/// Inputs `e1..eN`, gates `u1..uK` drawn from `and`/`or` with fan-in 1..=3
/// over earlier labels; the output is the last gate, or a random input when
/// there are no gates.
pub fn random_monotone_circuit(inputs: usize, gates: usize, seed: u64) -> Circuit {
    assert!(
        inputs > 0 && inputs % 2 == 0,
        "inputs come in e_i / e_(n+i) pairs"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<String> = (1..=inputs).map(|i| format!("e{i}")).collect();
    let mut out = Vec::with_capacity(gates);
    for g in 1..=gates {
        let fan_in = rng.random_range(1..=3.min(labels.len()));
        let ins: Vec<String> = sample(&mut rng, labels.len(), fan_in)
            .into_iter()
            .map(|i| labels[i].clone())
            .collect();
        let name = format!("u{g}");
        out.push(if rng.random_bool(0.5) {
            Gate::and(ins, name.clone())
        } else {
            Gate::or(ins, name.clone())
        });
        labels.push(name);
    }
    let output = if gates == 0 {
        labels.choose(&mut rng).expect("inputs exist").clone()
    } else {
        labels.last().expect("gates exist").clone()
    };
    Circuit::new(labels[..inputs].to_vec(), out, output).expect("generated circuit is valid")
}

/// Random propagator over `random_cnf(n, k, maxlen)`: inputs a random subset
/// of the variables, output a random variable. Propagation may fail.
pub fn random_propagator(n: usize, k: usize, maxlen: usize, seed: u64) -> Propagator {
    assert!(n > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_cnf(n, k, maxlen, rng.random());
    let inputs = (1..=n as u32)
        .filter(|_| rng.random_bool(0.5))
        .map(Var::new)
        .collect();
    let output = Var::new(rng.random_range(1..=n as u32));
    Propagator::new(f, inputs, output).expect("variables are declared")
}

/// Random propagator whose propagation never fails: inputs are `1..=inputs`,
/// every clause holds a positive literal over the `others` non-input
/// variables, and the output is a non-input variable. Setting every
/// non-input variable to true satisfies `φ|_I` for any `I`.
pub fn random_matching_propagator(
    inputs: usize,
    others: usize,
    k: usize,
    maxlen: usize,
    seed: u64,
) -> Propagator {
    assert!(others > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = inputs + others;
    let mut f = CnfFormula::new();
    for id in 1..=n as u32 {
        f.declare(Var::new(id));
    }
    for _ in 0..k {
        let anchor = Var::new(rng.random_range(inputs as u32 + 1..=n as u32));
        let len = rng.random_range(1..=maxlen.clamp(1, n));
        let mut lits = vec![anchor.pos()];
        let extra: Vec<usize> = sample(&mut rng, n, len.min(n))
            .into_iter()
            .filter(|&i| i as u32 + 1 != anchor.id())
            .take(len - 1)
            .collect();
        lits.extend(
            extra
                .into_iter()
                .map(|i| Literal::new(Var::new(i as u32 + 1), rng.random_bool(0.5))),
        );
        f.add_clause(Clause::new(lits));
    }
    let output = Var::new(rng.random_range(inputs as u32 + 1..=n as u32));
    Propagator::new(f, (1..=inputs as u32).map(Var::new).collect(), output)
        .expect("variables are declared")
}

/// Upward closure of a few random generator assignments over `1..=n`.
pub fn random_monotone_table(n: usize, seed: u64) -> Table<MatchingOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order: Vec<Var> = (1..=n as u32).map(Var::new).collect();
    let all = enumerate_assignments(&order).expect("small n");
    let generators: Vec<PartialAssignment> = (0..rng.random_range(0..=3))
        .map(|_| all.choose(&mut rng).expect("non-empty").clone())
        .collect();
    let rows = all
        .into_iter()
        .map(|a| {
            let yes = generators.iter().any(|g| g.is_subset(&a));
            (a, MatchingOutcome::from_bool(yes))
        })
        .collect();
    Table::new(order, SymbolTable::new(), rows)
}

/// Or of ands over the minimal `yes` assignments, on inputs `e1..e2n`.
pub fn monotone_dnf_circuit(table: &Table<MatchingOutcome>) -> Circuit {
    let order = table.order();
    let n = order.len();
    let yes: Vec<&PartialAssignment> = table
        .rows()
        .iter()
        .filter(|(_, o)| o.is_yes())
        .map(|(a, _)| a)
        .collect();
    let minimal: Vec<&PartialAssignment> = yes
        .iter()
        .filter(|a| !yes.iter().any(|b| b.len() < a.len() && b.is_subset(a)))
        .copied()
        .collect();
    let label = |l: Literal| {
        let i = order
            .iter()
            .position(|&v| v == l.var())
            .expect("literal over the table inputs");
        format!("e{}", if l.is_positive() { i + 1 } else { n + i + 1 })
    };
    let mut gates = Vec::new();
    let mut terms = Vec::new();
    for (k, point) in minimal.iter().enumerate() {
        let name = format!("t{}", k + 1);
        gates.push(Gate::and(
            point.literals().iter().map(|&l| label(l)),
            name.clone(),
        ));
        terms.push(name);
    }
    gates.push(Gate::or(terms, "out"));
    let inputs = (1..=2 * n).map(|i| format!("e{i}")).collect();
    Circuit::new(inputs, gates, "out").expect("dnf circuit is valid")
}

/// Names accepted by [`run_suite`], in report order.
pub const SUITES: &[&str] = &[
    "algorithm-agreement",
    "lemma-reif-stage-discipline",
    "theorem-reif-correspondence",
    "theorem-inject-equivalence",
    "counting",
    "failed-literal",
    "nu-roundtrip",
    "reified-propagator-bullets",
    "filtering-roundtrip",
    "th1-equiv",
    "th2-equiv",
    "th1-th2-roundtrip",
    "monotone-characterization",
];

/// Outcome of one suite on one seeded instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub suite: String,
    pub seed: u64,
    pub failure: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{} {} pass", self.suite, self.seed),
            Some(why) => write!(f, "{} {} fail {}", self.suite, self.seed, why),
        }
    }
}

type Check = fn(u64) -> std::result::Result<(), String>;

fn suite_check(name: &str) -> Option<Check> {
    Some(match name {
        "algorithm-agreement" => check_algorithm_agreement,
        "lemma-reif-stage-discipline" => check_stage_discipline,
        "theorem-reif-correspondence" => check_reif_correspondence,
        "theorem-inject-equivalence" => check_inject_equivalence,
        "counting" => check_counting,
        "failed-literal" => check_failed_literal,
        "nu-roundtrip" => check_nu_roundtrip,
        "reified-propagator-bullets" => check_reified_bullets,
        "filtering-roundtrip" => check_filtering_roundtrip,
        "th1-equiv" => check_compiled_circuit,
        "th2-equiv" => check_extracted_circuit,
        "th1-th2-roundtrip" => check_roundtrip,
        "monotone-characterization" => check_monotone_characterization,
        _ => return None,
    })
}

/// Runs `suite` (or every suite for `"all"`) on instances seeded
/// `seed, seed + 1, …, seed + count - 1`.
pub fn run_suite(suite: &str, seed: u64, count: usize) -> Result<Vec<CheckResult>> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        suite_check(suite).ok_or_else(|| Error::UnknownSuite(suite.to_string()))?;
        vec![suite]
    };
    let mut out = Vec::new();
    for name in names {
        let check = suite_check(name).expect("listed suite");
        let results: Vec<CheckResult> = (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let s = seed.wrapping_add(i);
                CheckResult {
                    suite: name.to_string(),
                    seed: s,
                    failure: check(s).err(),
                }
            })
            .collect();
        out.extend(results);
    }
    Ok(out)
}

fn corpus_formula(seed: u64, max_vars: usize, max_clauses: usize) -> CnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(0..=max_vars);
    let k = rng.random_range(0..=max_clauses);
    let maxlen = rng.random_range(1..=4);
    random_cnf(n, k, maxlen, rng.random())
}

fn fail(msg: impl Into<String>) -> std::result::Result<(), String> {
    Err(msg.into())
}

fn show(set: &BTreeSet<Literal>) -> String {
    let parts: Vec<String> = set.iter().map(|l| l.to_dimacs().to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn check_algorithm_agreement(seed: u64) -> std::result::Result<(), String> {
    let f = corpus_formula(seed, 10, 40);
    let standard = propagate_standard(&f);
    let staged = propagate_staged(&f);
    if standard.is_bottom() != staged.is_bottom() {
        return fail(format!(
            "bottom: standard {} staged {}",
            standard.is_bottom(),
            staged.is_bottom()
        ));
    }
    if !standard.is_bottom() && standard.produced() != staged.produced() {
        return fail(format!(
            "standard {} staged {}",
            show(standard.produced()),
            show(staged.produced())
        ));
    }
    if propagate(&f) != staged {
        return fail("incremental engine trace differs from the staged algorithm");
    }
    Ok(())
}

fn check_stage_discipline(seed: u64) -> std::result::Result<(), String> {
    let f = corpus_formula(seed, 6, 12);
    let sigma = reify(&f);
    let trace = propagate(sigma.formula());
    if trace != propagate_staged(sigma.formula()) {
        return fail("incremental engine trace differs on σ");
    }
    for (k, stage) in trace.stages().iter().enumerate() {
        for l in stage {
            let rv = sigma
                .index()
                .decode(l.var())
                .ok_or("produced a non-reified variable")?;
            if !l.is_positive() {
                return fail(format!("{rv} fixed to false"));
            }
            if rv.stage as usize != k {
                return fail(format!("{rv} produced at stage {k}"));
            }
        }
    }
    Ok(())
}

fn check_reif_correspondence(seed: u64) -> std::result::Result<(), String> {
    let f = corpus_formula(seed, 6, 12);
    let sigma = reify(&f);
    for c in sigma.formula().clauses() {
        if !c.iter().any(Literal::is_positive) {
            return fail(format!(
                "clause without a positive literal: {}",
                sigma.formula().display_clause(c)
            ));
        }
    }
    // All-true model: every clause has a positive literal.
    let all_true = sigma
        .formula()
        .clauses()
        .all(|c| c.iter().any(Literal::is_positive));
    if !all_true {
        return fail("all-true assignment is not a model");
    }
    let s = propagate(sigma.formula());
    if s.is_bottom() {
        return fail("propagation on σ fails");
    }
    let phi = propagate_staged(&f);
    let last = sigma.index().last_stage();
    for &v in f.variables() {
        for k in 1..=last {
            let before = phi.cumulative(k as usize);
            for w in [v.pos(), v.neg()] {
                let in_sigma = s.stage(k as usize).contains(&sigma.lit(w, k));
                if in_sigma != before.contains(&w) {
                    return fail(format!("literal {} stage {k}: σ {in_sigma}", w.to_dimacs()));
                }
            }
        }
    }
    Ok(())
}

fn reified_stage_one_plus(
    sigma: &crate::reify::ReifiedFormula,
    produced: &BTreeSet<Literal>,
) -> BTreeSet<Literal> {
    produced
        .iter()
        .copied()
        .filter(|l| {
            sigma
                .index()
                .decode(l.var())
                .is_some_and(|rv| rv.stage >= 1)
        })
        .collect()
}

fn check_inject_equivalence(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = corpus_formula(rng.random(), 6, 12);
    let vars: Vec<Var> = f.variables().iter().copied().collect();
    let inputs: BTreeSet<Var> = vars
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    let mut assignment = PartialAssignment::empty(inputs.iter().copied());
    for &v in &inputs {
        match rng.random_range(0..3) {
            1 => assignment.insert(v.pos()).expect("fresh"),
            2 => assignment.insert(v.neg()).expect("fresh"),
            _ => {}
        }
    }
    let injected = reify_injected(&f, &inputs).map_err(|e| e.to_string())?;
    let via_injection = propagate(&restrict(injected.formula(), &assignment));
    let restricted = reify(&restrict(&f, &assignment));
    let via_restriction = propagate(restricted.formula());
    let a = reified_stage_one_plus(&injected, via_injection.produced());
    let b = reified_stage_one_plus(&restricted, via_restriction.produced());
    if a != b {
        return fail(format!("injected {} restricted {}", show(&a), show(&b)));
    }
    Ok(())
}

fn check_counting(seed: u64) -> std::result::Result<(), String> {
    let f = corpus_formula(seed, 6, 12);
    let sigma = reify(&f);
    let n = f.num_vars();
    let wide: usize = f.clauses().filter(|c| c.len() >= 2).map(Clause::len).sum();
    let props = sigma.count(|r| matches!(r, Role::Propagation(_)));
    let deds = sigma.count(|r| matches!(r, Role::Deduction(_)));
    if sigma.index().len() != 2 * n * (n + 2) {
        return fail(format!("index size {}", sigma.index().len()));
    }
    if props != 2 * n * n {
        return fail(format!("{props} propagation clauses for n = {n}"));
    }
    if deds != n * wide {
        return fail(format!("{deds} deduction clauses, expected {}", n * wide));
    }
    Ok(())
}

fn check_failed_literal(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let k = rng.random_range(0..=12);
    let f = random_cnf(n, k, rng.random_range(1..=3), rng.random());
    let probe = Literal::new(
        Var::new(rng.random_range(1..=n as u32)),
        rng.random_bool(0.5),
    );
    let mut probed = f.clone();
    probed.add_clause(Clause::unit(probe));
    let direct = propagate(&probed).is_bottom();
    let (g, target) = failed_literal_formula(&f, probe);
    let simulated = propagate(&g).produced().contains(&target);
    if direct != simulated {
        return fail(format!(
            "probe {}: direct {direct} simulated {simulated}",
            probe.to_dimacs()
        ));
    }
    Ok(())
}

fn small_propagator(seed: u64) -> Propagator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=5);
    let k = rng.random_range(0..=8);
    random_propagator(n, k, rng.random_range(1..=3), rng.random())
}

fn describe(a: &PartialAssignment) -> String {
    show(a.literals())
}

fn check_nu_roundtrip(seed: u64) -> std::result::Result<(), String> {
    let p = small_propagator(seed);
    let order = p.input_order();
    let nu = propagator_to_nu(&p);
    let back = nu_to_propagator(&nu);
    let direct =
        NuPropagator::new(p.inputs().clone(), p.formula().clone()).map_err(|e| e.to_string())?;
    let lifted = nu_to_propagator(&direct);

    // reif counting on φ ∧ (¬s): init, propagation, deduction, injection and
    // one detector clause per variable.
    let phi = nu.formula();
    let n = phi.num_vars();
    let units = phi.clauses().filter(|c| c.is_unit()).count();
    let wide: usize = phi
        .clauses()
        .filter(|c| c.len() >= 2)
        .map(Clause::len)
        .sum();
    let bound = 2 * units + 2 * n * n + n * wide + 2 * order.len() + n;
    if back.formula().num_clauses() > bound {
        return fail(format!(
            "{} clauses exceed the bound {bound}",
            back.formula().num_clauses()
        ));
    }

    for a in enumerate_assignments(&order).map_err(|e| e.to_string())? {
        let expected_nu = eval_nu(&direct, &a).map_err(|e| e.to_string())?;
        match eval_matching(&lifted, &a) {
            Ok(o) if o == expected_nu => {}
            Ok(o) => return fail(format!("I={}: ν {expected_nu} lifted {o}", describe(&a))),
            Err(e) => return fail(format!("I={}: lifted propagator {e}", describe(&a))),
        }
        let Ok(m) = eval_matching(&p, &a) else {
            continue;
        };
        let via_nu = eval_nu(&nu, &a).map_err(|e| e.to_string())?;
        let via_back = eval_matching(&back, &a).map_err(|e| format!("I={}: {e}", describe(&a)))?;
        if via_nu != m || via_back != m {
            return fail(format!(
                "I={}: propagator {m} ν {via_nu} round trip {via_back}",
                describe(&a)
            ));
        }
    }
    Ok(())
}

fn check_reified_bullets(seed: u64) -> std::result::Result<(), String> {
    let p = small_propagator(seed);
    let rp = reify_propagator(&p);
    for a in enumerate_assignments(&p.input_order()).map_err(|e| e.to_string())? {
        let direct = p.run(&a).map_err(|e| e.to_string())?;
        let r = propagate(&restrict(rp.formula(), &a));
        if r.is_bottom() {
            return fail(format!("I={}: reified propagator fails", describe(&a)));
        }
        let checks = [
            ("fail", direct.is_bottom(), rp.out_fail()),
            (
                "true",
                direct.produced().contains(&p.output().pos()),
                rp.out_true(),
            ),
            (
                "false",
                direct.produced().contains(&p.output().neg()),
                rp.out_false(),
            ),
        ];
        for (what, expected, var) in checks {
            if r.fixes(var.pos()) != expected {
                return fail(format!("I={}: {what} expected {expected}", describe(&a)));
            }
        }
    }
    Ok(())
}

fn check_filtering_roundtrip(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let k = rng.random_range(0..=5);
    let p = random_propagator(n, k, rng.random_range(1..=3), rng.random());
    let (pt, pf, pfail) = filtering_to_matchings(&p);
    let combined = matchings_to_filtering(&pt, &pf, &pfail).map_err(|e| e.to_string())?;
    for a in enumerate_assignments(&p.input_order()).map_err(|e| e.to_string())? {
        let f = eval_filtering(&p, &a).map_err(|e| e.to_string())?;
        let g = eval_filtering(&combined, &a).map_err(|e| e.to_string())?;
        if f != g {
            return fail(format!("I={}: original {f} combined {g}", describe(&a)));
        }
        let yes = |q: &Propagator| eval_matching(q, &a).map(MatchingOutcome::is_yes);
        let fail_yes = yes(&pfail).map_err(|e| format!("I={}: fail part {e}", describe(&a)))?;
        if fail_yes != (f == FilteringOutcome::Fail) {
            return fail(format!("I={}: fail part disagrees with {f}", describe(&a)));
        }
        if f != FilteringOutcome::Fail {
            let t = yes(&pt).map_err(|e| e.to_string())?;
            let fl = yes(&pf).map_err(|e| e.to_string())?;
            if t != (f == FilteringOutcome::True) || fl != (f == FilteringOutcome::False) {
                return fail(format!(
                    "I={}: parts true {t} false {fl} for {f}",
                    describe(&a)
                ));
            }
        }
    }
    Ok(())
}

fn corpus_circuit(seed: u64) -> (Circuit, Vec<Var>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = rng.random_range(1..=4);
    let gates = rng.random_range(0..=12);
    let c = random_monotone_circuit(2 * pairs, gates, rng.random());
    (c, (1..=pairs as u32).map(Var::new).collect())
}

fn equivalence(p: &Propagator, c: &Circuit) -> std::result::Result<(), String> {
    match check_equiv_propagator_circuit(p, c) {
        Ok(None) => Ok(()),
        Ok(Some(cx)) => Err(cx.describe(p.formula().names())),
        Err(e) => Err(e.to_string()),
    }
}

fn check_compiled_circuit(seed: u64) -> std::result::Result<(), String> {
    let (c, vars) = corpus_circuit(seed);
    let p = circuit_to_propagator(&c, &vars).map_err(|e| e.to_string())?;
    let expected: usize = c
        .gates()
        .iter()
        .map(|g| match g.kind() {
            crate::circuit::GateKind::Or => g.inputs().len(),
            _ => 1,
        })
        .sum();
    let negated_output = c.inputs()[vars.len()..].iter().any(|l| l == c.output());
    let expected = expected + usize::from(negated_output);
    if p.formula().num_clauses() != expected {
        return fail(format!(
            "{} clauses, expected {expected}",
            p.formula().num_clauses()
        ));
    }
    equivalence(&p, &c)
}

fn corpus_matching_propagator(seed: u64) -> Propagator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.random_range(0..=5);
    let others = rng.random_range(1..=3);
    let k = rng.random_range(0..=10);
    random_matching_propagator(inputs, others, k, rng.random_range(1..=3), rng.random())
}

fn check_extracted_circuit(seed: u64) -> std::result::Result<(), String> {
    let p = corpus_matching_propagator(seed);
    let c = propagator_to_circuit(&p);
    if !c.is_monotone() {
        return fail("extracted circuit is not monotone");
    }
    let sigma = reify_injected(p.formula(), p.inputs()).map_err(|e| e.to_string())?;
    let bound = sigma.tagged_clauses().len() + sigma.index().len() + 1;
    if c.num_gates() > bound {
        return fail(format!("{} gates exceed {bound}", c.num_gates()));
    }
    equivalence(&p, &c)
}

fn check_roundtrip(seed: u64) -> std::result::Result<(), String> {
    let (c, vars) = corpus_circuit(seed);
    let p = circuit_to_propagator(&c, &vars).map_err(|e| e.to_string())?;
    let back = propagator_to_circuit(&p);
    for a in enumerate_assignments(&vars).map_err(|e| e.to_string())? {
        let bits = boolean_representation(&a, &vars);
        let x = c.evaluate(bits.bits()).map_err(|e| e.to_string())?;
        let y = back.evaluate(bits.bits()).map_err(|e| e.to_string())?;
        if x != y {
            return fail(format!("I={}: original {x} round trip {y}", describe(&a)));
        }
    }
    Ok(())
}

fn check_monotone_characterization(seed: u64) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = corpus_matching_propagator(rng.random());
    let table = tabulate(&p)
        .and_then(|t| t.to_matching())
        .map_err(|e| e.to_string())?;
    if let Some(cx) = check_monotone(&table) {
        return fail(format!("propagator table: {cx}"));
    }

    let target = random_monotone_table(rng.random_range(0..=3), rng.random());
    if let Some(cx) = check_monotone(&target) {
        return fail(format!("generated table: {cx}"));
    }
    let circuit = monotone_dnf_circuit(&target);
    let q = circuit_to_propagator(&circuit, target.order()).map_err(|e| e.to_string())?;
    let realized = tabulate(&q)
        .and_then(|t| t.to_matching())
        .map_err(|e| e.to_string())?;
    if realized.rows() != target.rows() {
        return fail("realized propagator computes a different table");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reify::Sign;

    fn v(id: u32) -> Var {
        Var::new(id)
    }

    fn table(rows: &[(&[i64], bool)]) -> Table<MatchingOutcome> {
        let order = vec![v(1)];
        let rows = rows
            .iter()
            .map(|(lits, yes)| {
                let a = PartialAssignment::from_literals(
                    order.iter().copied(),
                    lits.iter().map(|&x| Literal::from_dimacs(x).unwrap()),
                )
                .unwrap();
                (a, MatchingOutcome::from_bool(*yes))
            })
            .collect();
        Table::new(order, SymbolTable::new(), rows)
    }

    #[test]
    fn non_propagatable_table_is_caught() {
        // {¬v} → yes, {v} → no, {} → yes
        let g = table(&[(&[-1], true), (&[1], false), (&[], true)]);
        let cx = check_monotone(&g).unwrap();
        assert!(cx.first.is_empty());
        assert_eq!(cx.second.literals(), &[v(1).pos()].into());
        assert_eq!(
            cx.to_string(),
            "monotonicity-violation I={} (yes) J={v1} (no)"
        );
    }

    #[test]
    fn constant_yes_is_monotone() {
        let t = table(&[(&[], true), (&[1], true), (&[-1], true)]);
        assert_eq!(check_monotone(&t), None);
    }

    #[test]
    fn partial_domain_uses_smallest_gap() {
        let order = vec![v(1), v(2)];
        let mk = |lits: &[i64], yes| {
            let a = PartialAssignment::from_literals(
                order.iter().copied(),
                lits.iter().map(|&x| Literal::from_dimacs(x).unwrap()),
            )
            .unwrap();
            (a, MatchingOutcome::from_bool(yes))
        };
        let t = Table::new(
            order.clone(),
            SymbolTable::new(),
            vec![
                mk(&[], true),
                mk(&[1, 2], false),
                mk(&[1], true),
                mk(&[-2], false),
            ],
        );
        let cx = check_monotone(&t).unwrap();
        assert!(cx.first.is_empty());
        assert_eq!(cx.second.len(), 1);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_cnf(6, 20, 4, 1), random_cnf(6, 20, 4, 1));
        assert_eq!(random_cnf(0, 0, 3, 5).num_clauses(), 0);
        let f = random_cnf(6, 20, 4, 1);
        assert_eq!(f.num_vars(), 6);
        assert!(f.clauses().all(|c| (1..=4).contains(&c.len())));
        assert_eq!(
            random_monotone_circuit(8, 12, 7),
            random_monotone_circuit(8, 12, 7)
        );
        let c = random_monotone_circuit(2, 0, 3);
        assert_eq!(c.num_gates(), 0);
        assert!(c.inputs().contains(&c.output().to_string()));
    }

    #[test]
    fn matching_propagators_never_fail() {
        for seed in 0..20 {
            let p = random_matching_propagator(3, 2, 8, 3, seed);
            assert!(tabulate(&p).unwrap().to_matching().is_ok());
        }
    }

    #[test]
    fn corrupted_clause_is_detected() {
        let c = Circuit::new(
            ["e1", "e2", "e3", "e4"].map(String::from).to_vec(),
            vec![Gate::and(["e1", "e2"], "u1"), Gate::or(["u1", "e4"], "u2")],
            "u2",
        )
        .unwrap();
        let p = circuit_to_propagator(&c, &[v(1), v(2)]).unwrap();
        assert_eq!(check_equiv_propagator_circuit(&p, &c).unwrap(), None);
        // drop v2 from the and-clause: (¬v1 ∨ v3)
        let mut f = CnfFormula::from_dimacs_clauses(&[&[-1, 3], &[-3, 4], &[2, 4]]);
        f.set_name(v(4), "s");
        let bad = Propagator::new(f, [v(1), v(2)].into(), v(4)).unwrap();
        let cx = check_equiv_propagator_circuit(&bad, &c).unwrap().unwrap();
        assert_eq!(cx.witness, Witness::EquivalenceMismatch);
    }

    #[test]
    fn dnf_realizes_tables() {
        for seed in 0..10 {
            let t = random_monotone_table(2, seed);
            let c = monotone_dnf_circuit(&t);
            for (a, o) in t.rows() {
                let bits = boolean_representation(a, t.order());
                assert_eq!(c.evaluate(bits.bits()).unwrap(), o.is_yes());
            }
        }
    }

    #[test]
    fn every_suite_runs() {
        for name in SUITES {
            for r in run_suite(name, 11, 3).unwrap() {
                assert!(r.passed(), "{r}");
            }
        }
        assert_eq!(
            run_suite("nope", 0, 1),
            Err(Error::UnknownSuite("nope".into()))
        );
        assert_eq!(run_suite("all", 0, 1).unwrap().len(), SUITES.len());
    }

    #[test]
    fn reified_output_signs() {
        let f = CnfFormula::from_dimacs_clauses(&[&[1]]);
        let p = Propagator::new(f, BTreeSet::new(), v(1)).unwrap();
        let rp = reify_propagator(&p);
        let idx = rp.reified().index();
        assert_eq!(idx.decode(rp.out_false()).unwrap().sign, Sign::Minus);
    }
}
