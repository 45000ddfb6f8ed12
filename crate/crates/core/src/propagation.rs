//! Unit resolution: the simplifying loop, the staged variant and a fast
//! incremental engine that produces the same staged trace.

use std::collections::BTreeSet;

use crate::cnf::{Clause, CnfFormula, Literal};

/// Final answer of unit resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Bottom,
    Literals(BTreeSet<Literal>),
}

/// Outcome plus the per-stage trace.
///
/// `stages()[k]` holds the literals first produced at round `k + 1`. Trailing
/// empty rounds are not stored; [`PropagationResult::rounds`] gives the
/// logical number of rounds that were run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationResult {
    bottom: bool,
    stages: Vec<BTreeSet<Literal>>,
    rounds: usize,
    produced: BTreeSet<Literal>,
}

impl PropagationResult {
    fn new(bottom: bool, mut stages: Vec<BTreeSet<Literal>>, rounds: usize) -> Self {
        while stages.last().is_some_and(BTreeSet::is_empty) {
            stages.pop();
        }
        let produced = stages.iter().flatten().copied().collect();
        PropagationResult {
            bottom,
            stages,
            rounds,
            produced,
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.bottom
    }

    pub fn outcome(&self) -> Outcome {
        if self.bottom {
            Outcome::Bottom
        } else {
            Outcome::Literals(self.produced.clone())
        }
    }

    /// The fixed literals, or `None` on bottom.
    pub fn literals(&self) -> Option<&BTreeSet<Literal>> {
        (!self.bottom).then_some(&self.produced)
    }

    /// Union of every stage, also defined when the outcome is bottom.
    pub fn produced(&self) -> &BTreeSet<Literal> {
        &self.produced
    }

    /// Whether `lit` is in a non-bottom outcome.
    pub fn fixes(&self, lit: Literal) -> bool {
        !self.bottom && self.produced.contains(&lit)
    }

    pub fn stages(&self) -> &[BTreeSet<Literal>] {
        &self.stages
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Stage by 0-based index; empty past the stored trace.
    pub fn stage(&self, index: usize) -> &BTreeSet<Literal> {
        static EMPTY: BTreeSet<Literal> = BTreeSet::new();
        self.stages.get(index).unwrap_or(&EMPTY)
    }

    /// `U_k`, with rounds numbered from 1.
    pub fn stage_from_one(&self, k: usize) -> &BTreeSet<Literal> {
        assert!(k >= 1, "rounds are numbered from 1");
        self.stage(k - 1)
    }

    /// `U_{1..k}`, with rounds numbered from 1.
    pub fn cumulative(&self, k: usize) -> BTreeSet<Literal> {
        self.stages.iter().take(k).flatten().copied().collect()
    }

    /// Literals in production order (stage by stage, sorted within a stage).
    pub fn in_order(&self) -> impl Iterator<Item = Literal> + '_ {
        self.stages.iter().flatten().copied()
    }
}

/// Classic unit propagation: repeatedly pick a unit clause `(l)`, drop satisfied clauses
/// and strip `¬l`, until an empty clause appears or no unit remains.
///
/// The trace holds one singleton step per iteration. On bottom the unit that
/// was emptied is appended, so the trace shows the complementary pair.
pub fn propagate_standard(formula: &CnfFormula) -> PropagationResult {
    let mut clauses: Vec<Vec<Literal>> = formula.clauses().map(|c| c.literals().to_vec()).collect();
    let mut steps: Vec<BTreeSet<Literal>> = Vec::new();
    let mut bottom = clauses.iter().any(Vec::is_empty);
    while !bottom {
        let Some(l) = clauses.iter().find(|c| c.len() == 1).map(|c| c[0]) else {
            break;
        };
        let neg = l.negate();
        let mut next = Vec::with_capacity(clauses.len());
        for mut c in clauses {
            if c.contains(&l) {
                continue;
            }
            if let Some(pos) = c.iter().position(|&x| x == neg) {
                c.remove(pos);
                if c.is_empty() {
                    bottom = true;
                }
            }
            next.push(c);
        }
        clauses = next;
        steps.push(BTreeSet::from([l]));
        if bottom {
            steps.push(BTreeSet::from([neg]));
        }
    }
    let rounds = steps.len();
    PropagationResult::new(bottom, steps, rounds)
}

/// Dense literal set indexed by [`Literal::code`].
struct Marks(Vec<bool>);

impl Marks {
    fn new(max_var: u32) -> Marks {
        Marks(vec![false; 2 * (max_var as usize + 1)])
    }

    fn from_set(max_var: u32, set: &BTreeSet<Literal>) -> Marks {
        let top = set.iter().map(|l| l.var().id()).max().unwrap_or(0);
        let mut m = Marks::new(max_var.max(top));
        for l in set {
            m.insert(*l);
        }
        m
    }

    fn contains(&self, l: Literal) -> bool {
        self.0.get(l.code()).copied().unwrap_or(false)
    }

    fn insert(&mut self, l: Literal) {
        self.0[l.code()] = true;
    }
}

/// Literals `w` of `clause` such that every other literal is falsified by
/// `marks` and `w` itself is not yet in `marks`.
fn stage_candidates(clause: &[Literal], marks: &Marks, out: &mut BTreeSet<Literal>) {
    let falsified = clause.iter().filter(|l| marks.contains(l.negate())).count();
    if falsified + 1 == clause.len() {
        let w = *clause
            .iter()
            .find(|l| !marks.contains(l.negate()))
            .expect("one literal is not falsified");
        if !marks.contains(w) {
            out.insert(w);
        }
    } else if falsified == clause.len() {
        out.extend(clause.iter().copied().filter(|&w| !marks.contains(w)));
    }
}

/// One propagation stage. Returns every literal `w ∉ E` such
/// that some clause `(l1 ∨ … ∨ lk ∨ w)` has `¬l1, …, ¬lk ∈ E`.
pub fn propagation_stage(formula: &CnfFormula, known: &BTreeSet<Literal>) -> BTreeSet<Literal> {
    let marks = Marks::from_set(formula.max_var(), known);
    let mut out = BTreeSet::new();
    for c in formula.clauses() {
        stage_candidates(c.literals(), &marks, &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StagedOptions {
    /// Stop once a stage produces nothing. The result is unchanged since
    /// every later stage would be empty too.
    pub early_exit: bool,
}

/// Staged propagation: `n + 1` stages, `n = |var(φ)|`; bottom iff the
/// accumulated set holds a complementary pair (or φ contains `{}`).
pub fn propagate_staged(formula: &CnfFormula) -> PropagationResult {
    propagate_staged_with(formula, StagedOptions::default())
}

pub fn propagate_staged_with(formula: &CnfFormula, options: StagedOptions) -> PropagationResult {
    let rounds = formula.num_vars() + 1;
    let mut marks = Marks::new(formula.max_var());
    let clauses: Vec<&Clause> = formula.clauses().collect();
    let mut stages = Vec::new();
    for _ in 0..rounds {
        let mut fresh = BTreeSet::new();
        for c in &clauses {
            stage_candidates(c.literals(), &marks, &mut fresh);
        }
        for &l in &fresh {
            marks.insert(l);
        }
        let done = fresh.is_empty();
        stages.push(fresh);
        if done && options.early_exit {
            break;
        }
    }
    let conflict = stages
        .iter()
        .flatten()
        .any(|l| l.is_positive() && marks.contains(l.negate()));
    PropagationResult::new(conflict || formula.has_empty_clause(), stages, rounds)
}

/// Same trace as [`propagate_staged`], computed incrementally: each clause
/// keeps a count of falsified literals and is only re-examined when that
/// count grows. Linear in the formula size.
pub fn propagate(formula: &CnfFormula) -> PropagationResult {
    let rounds = formula.num_vars() + 1;
    let clauses: Vec<&[Literal]> = formula.clauses().map(Clause::literals).collect();
    let max_var = formula.max_var();
    let mut marks = Marks::new(max_var);
    let mut occurrences: Vec<Vec<u32>> = vec![Vec::new(); 2 * (max_var as usize + 1)];
    for (i, c) in clauses.iter().enumerate() {
        for l in c.iter() {
            occurrences[l.code()].push(i as u32);
        }
    }
    let mut falsified = vec![0usize; clauses.len()];
    let mut stamp = vec![usize::MAX; clauses.len()];
    let mut pending: Vec<u32> = clauses
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() == 1)
        .map(|(i, _)| i as u32)
        .collect();

    let mut stages = Vec::new();
    let mut conflict = false;
    for round in 0..rounds {
        let mut fresh = BTreeSet::new();
        for &ci in &pending {
            let c = clauses[ci as usize];
            let count = falsified[ci as usize];
            if count + 1 == c.len() {
                let w = *c
                    .iter()
                    .find(|l| !marks.contains(l.negate()))
                    .expect("one literal is not falsified");
                if !marks.contains(w) {
                    fresh.insert(w);
                }
            } else if count == c.len() {
                fresh.extend(c.iter().copied().filter(|&w| !marks.contains(w)));
            }
        }
        if fresh.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &l in &fresh {
            marks.insert(l);
            conflict |= marks.contains(l.negate());
            for &ci in &occurrences[l.negate().code()] {
                falsified[ci as usize] += 1;
                if stamp[ci as usize] != round {
                    stamp[ci as usize] = round;
                    next.push(ci);
                }
            }
        }
        stages.push(fresh);
        pending = next;
    }
    PropagationResult::new(conflict || formula.has_empty_clause(), stages, rounds)
}
