//! Translations between monotone circuits and propagators.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::cnf::{Clause, CnfFormula, Literal, Var};
use crate::error::{Error, Result};
use crate::propagator::Propagator;
use crate::reify::{reify_injected, ReifiedVariable, Role, Sign};

/// Compiles a monotone circuit over `e_1..e_2n` into a propagator over
/// `vars = v_1..v_n`. Input `e_i` stands for `v_i` and `e_{n+i}` for `¬v_i`.
///
/// Gate outputs get fresh variables in topological order, except the output
/// gate whose variable is the propagator output (named `s`).
pub fn circuit_to_propagator(circuit: &Circuit, vars: &[Var]) -> Result<Propagator> {
    if !circuit.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let n = vars.len();
    if circuit.inputs().len() != 2 * n {
        return Err(Error::InputLength {
            expected: 2 * n,
            actual: circuit.inputs().len(),
        });
    }
    let distinct: BTreeSet<Var> = vars.iter().copied().collect();
    if distinct.len() != n {
        return Err(Error::InvalidPropagator("repeated input variable".into()));
    }

    let mut tau: HashMap<&str, Literal> = HashMap::new();
    for (i, &v) in vars.iter().enumerate() {
        tau.insert(&circuit.inputs()[i], v.pos());
        tau.insert(&circuit.inputs()[n + i], v.neg());
    }
    let mut formula = CnfFormula::new();
    for &v in vars {
        formula.declare(v);
    }
    let mut next = vars.iter().map(|v| v.id()).max().unwrap_or(0) + 1;
    let mut fresh = || {
        let v = Var::new(next);
        next += 1;
        v
    };
    let gates: Vec<&Gate> = circuit.topological_gates().collect();
    for g in &gates {
        if g.output() != circuit.output() {
            tau.insert(g.output(), fresh().pos());
        }
    }
    let output = match tau.get(circuit.output()) {
        Some(l) if l.is_positive() => l.var(),
        Some(l) => {
            // Output is some e_{n+i}: s is fixed exactly when ¬v_i is.
            let s = fresh();
            formula.add_clause(Clause::new([!*l, s.pos()]));
            formula.set_name(s, "s");
            s
        }
        None => {
            let s = fresh();
            tau.insert(circuit.output(), s.pos());
            formula.set_name(s, "s");
            s
        }
    };
    for g in gates {
        let target = tau[g.output()];
        let antecedents = g.inputs().iter().map(|l| !tau[l.as_str()]);
        match g.kind() {
            GateKind::And | GateKind::Tie => {
                formula.add_clause(antecedents.chain([target]).collect());
            }
            GateKind::Or => {
                for a in antecedents {
                    formula.add_clause(Clause::new([a, target]));
                }
            }
            GateKind::Not => unreachable!("checked monotone"),
        }
    }
    Propagator::new(formula, vars.iter().copied().collect(), output)
}

/// Bookkeeping of the propagator-to-circuit construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodeIndex {
    /// `⋄t` for `t` and `⋄t̄` for `¬t`, per input variable.
    pub inputs: BTreeMap<Literal, String>,
    pub major: BTreeMap<ReifiedVariable, String>,
    pub additional: Vec<String>,
    /// Constant-0 nodes right after layer 0.
    pub initial_zero: BTreeSet<String>,
    /// Constant-1 nodes right after layer 0.
    pub initial_one: BTreeSet<String>,
    pub zero: BTreeSet<String>,
    pub one: BTreeSet<String>,
}

/// Result of [`extract_circuit`]: the circuit, its node ledger and the gates
/// produced for each layer `1..=n+1` (indices into `circuit.gates()`).
#[derive(Debug, Clone)]
pub struct Extraction {
    pub circuit: Circuit,
    pub nodes: NodeIndex,
    pub layers: Vec<Vec<usize>>,
}

impl Extraction {
    pub fn layer(&self, i: usize) -> impl Iterator<Item = &Gate> {
        self.layers
            .get(i - 1)
            .into_iter()
            .flatten()
            .map(|&k| &self.circuit.gates()[k])
    }
}

/// Builds a monotone circuit computing the Boolean counterpart of the
/// matching function of `p`.
pub fn propagator_to_circuit(p: &Propagator) -> Circuit {
    extract_circuit(p).circuit
}

pub fn extract_circuit(p: &Propagator) -> Extraction {
    let phi = p.formula();
    let sigma = reify_injected(phi, p.inputs()).expect("inputs are variables of the formula");
    let index = sigma.index();
    let names = phi.names();
    let sigma_names = sigma.formula().names();
    let last = index.last_stage();

    let mut nodes = NodeIndex::default();
    let order: Vec<Var> = p.inputs().iter().copied().collect();
    let mut circuit_inputs = Vec::with_capacity(2 * order.len());
    for &t in &order {
        let name = names.name(t).into_owned();
        nodes.inputs.insert(t.pos(), name.clone());
        circuit_inputs.push(name);
    }
    for &t in &order {
        let name = format!("~{}", names.name(t));
        nodes.inputs.insert(t.neg(), name.clone());
        circuit_inputs.push(name);
    }
    for (rv, var) in index.iter() {
        nodes.major.insert(rv, sigma_names.name(var).into_owned());
    }

    // Layer 0: units `(v_0^±)` are constant 1; stage-0 nodes of non-injected
    // variables without such a unit are constant 0.
    let units: BTreeSet<Var> = sigma.layer(0).map(|(c, _)| c.literals()[0].var()).collect();
    for (rv, var) in index.iter().filter(|(rv, _)| rv.stage == 0) {
        let node = nodes.major[&rv].clone();
        if units.contains(&var) {
            nodes.one.insert(node);
        } else if !p.inputs().contains(&rv.base) {
            nodes.zero.insert(node);
        }
    }
    nodes.initial_zero = nodes.zero.clone();
    nodes.initial_one = nodes.one.clone();

    let mut gates: Vec<Gate> = Vec::new();
    let mut built: BTreeSet<String> = BTreeSet::new();
    let mut layers = Vec::new();
    for i in 1..=last {
        let mut layer_gates = Vec::new();
        let clauses: Vec<(&Clause, Role)> = sigma.layer(i).map(|(c, r)| (c, *r)).collect();
        for &base in index.bases() {
            for sign in [Sign::Plus, Sign::Minus] {
                let rv = ReifiedVariable {
                    base,
                    stage: i,
                    sign,
                };
                let target = index.var(rv);
                let node = nodes.major[&rv].clone();

                // C: clauses with target u, simplified against U0 / U1.
                let mut seen = BTreeSet::new();
                let mut simplified: Vec<(Vec<String>, String)> = Vec::new();
                'clauses: for (c, role) in &clauses {
                    if !c.contains(target.pos()) || !seen.insert(*c) {
                        continue;
                    }
                    let mut ants = Vec::new();
                    for l in c.iter().filter(|&l| l != target.pos()) {
                        let ant = if let Some(w) = index.decode(l.var()) {
                            nodes.major[&w].clone()
                        } else {
                            // Raw input literal: ¬t reads ⋄t, t reads ⋄t̄.
                            nodes.inputs[&!l].clone()
                        };
                        let is_input = circuit_inputs.contains(&ant);
                        if nodes.zero.contains(&ant)
                            || (!is_input && !built.contains(&ant) && !nodes.one.contains(&ant))
                        {
                            continue 'clauses;
                        }
                        if !nodes.one.contains(&ant) {
                            ants.push(ant);
                        }
                    }
                    let note = format!("{role}: {}", sigma.formula().display_clause(c));
                    simplified.push((ants, note));
                }

                if simplified.is_empty() {
                    nodes.zero.insert(node);
                } else if simplified.iter().any(|(ants, _)| ants.is_empty()) {
                    nodes.one.insert(node);
                } else if let [(ants, note)] = simplified.as_slice() {
                    layer_gates.push(gates.len());
                    gates.push(single_gate(ants, &node).with_note(note.clone()));
                    built.insert(node);
                } else {
                    let mut alts = Vec::new();
                    for (k, (ants, note)) in simplified.iter().enumerate() {
                        let alt = format!("{node}_alt{}", k + 1);
                        layer_gates.push(gates.len());
                        gates.push(single_gate(ants, &alt).with_note(note.clone()));
                        nodes.additional.push(alt.clone());
                        alts.push(alt);
                    }
                    layer_gates.push(gates.len());
                    gates.push(
                        Gate::or(alts, node.clone()).with_note(format!("any clause fixing {node}")),
                    );
                    built.insert(node);
                }
            }
        }
        layers.push(layer_gates);
    }

    let out_node = nodes.major[&ReifiedVariable {
        base: p.output(),
        stage: last,
        sign: Sign::Plus,
    }]
        .clone();
    if nodes.one.contains(&out_node) || nodes.zero.contains(&out_node) {
        let constant = if nodes.one.contains(&out_node) {
            Gate::and(Vec::<String>::new(), out_node.clone()).with_note("constant 1")
        } else {
            Gate::or(Vec::<String>::new(), out_node.clone()).with_note("constant 0")
        };
        layers
            .last_mut()
            .expect("at least one layer")
            .push(gates.len());
        gates.push(constant);
    }
    let circuit =
        Circuit::new(circuit_inputs, gates, out_node).expect("construction yields a valid circuit");
    Extraction {
        circuit,
        nodes,
        layers,
    }
}

fn single_gate(ants: &[String], out: &str) -> Gate {
    match ants {
        [one] => Gate::tie(one.clone(), out),
        _ => Gate::and(ants.iter().cloned(), out),
    }
}
