//! Python bindings: formulas, propagation, reification, propagators and
//! circuits. Literals are DIMACS integers; variables are positive integers.

use std::collections::{BTreeSet, HashMap};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use unitres::{
    check_monotone as check_table, circuit_to_propagator, dimacs, eval_filtering, eval_matching,
    extract_circuit as extract, failed_literal_formula, propagate as propagate_fast,
    propagate_staged, propagate_standard, reify_injected, run_suite as run,
    tabulate as tabulate_fn, Circuit as CoreCircuit, Clause, CnfFormula, Literal, MatchingOutcome,
    PartialAssignment, Propagator as CorePropagator, ReifiedFormula, ReifiedVariable, Table, Var,
};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn literal(x: i64) -> PyResult<Literal> {
    Literal::from_dimacs(x).ok_or_else(|| value_error(format!("invalid literal {x}")))
}

fn var(x: u32) -> PyResult<Var> {
    Var::try_new(x).ok_or_else(|| value_error(format!("invalid variable {x}")))
}

fn dimacs_list(lits: impl IntoIterator<Item = Literal>) -> Vec<i64> {
    lits.into_iter().map(Literal::to_dimacs).collect()
}

fn assignment(universe: &BTreeSet<Var>, values: HashMap<u32, bool>) -> PyResult<PartialAssignment> {
    let lits = values
        .into_iter()
        .map(|(v, b)| var(v).map(|v| Literal::new(v, b)))
        .collect::<PyResult<Vec<_>>>()?;
    PartialAssignment::from_literals(universe.iter().copied(), lits).map_err(value_error)
}

/// A CNF formula over positive integer variables.
#[pyclass(name = "Formula", module = "pyunitres")]
struct Formula {
    inner: CnfFormula,
}

#[pymethods]
impl Formula {
    #[new]
    #[pyo3(signature = (clauses, num_vars = 0))]
    fn new(clauses: Vec<Vec<i64>>, num_vars: u32) -> PyResult<Self> {
        let mut inner = CnfFormula::new();
        for c in clauses {
            let lits = c.into_iter().map(literal).collect::<PyResult<Vec<_>>>()?;
            inner.add_clause(Clause::new(lits));
        }
        for v in 1..=num_vars {
            inner.declare(Var::new(v));
        }
        Ok(Formula { inner })
    }

    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        dimacs::parse_formula(text)
            .map(|inner| Formula { inner })
            .map_err(value_error)
    }

    fn to_dimacs(&self) -> String {
        dimacs::write(&self.inner)
    }

    #[getter]
    fn clauses(&self) -> Vec<Vec<i64>> {
        self.inner
            .clauses()
            .map(|c| dimacs_list(c.iter()))
            .collect()
    }

    #[getter]
    fn variables(&self) -> Vec<u32> {
        self.inner.variables().iter().map(|v| v.id()).collect()
    }

    fn set_name(&mut self, variable: u32, name: &str) -> PyResult<()> {
        self.inner.set_name(var(variable)?, name);
        Ok(())
    }

    fn name(&self, variable: u32) -> PyResult<String> {
        Ok(self.inner.names().name(var(variable)?).into_owned())
    }

    fn __len__(&self) -> usize {
        self.inner.num_clauses()
    }

    fn __repr__(&self) -> String {
        let clauses: Vec<String> = self
            .inner
            .clauses()
            .map(|c| self.inner.display_clause(c))
            .collect();
        format!("Formula({})", clauses.join(" & "))
    }
}

/// Outcome of unit propagation: bottom flag and the literals of each stage.
#[pyclass(name = "Trace", module = "pyunitres", frozen)]
struct Trace {
    #[pyo3(get)]
    bottom: bool,
    #[pyo3(get)]
    stages: Vec<Vec<i64>>,
}

#[pymethods]
impl Trace {
    /// Fixed literals in production order, or `None` on bottom.
    fn literals(&self) -> Option<Vec<i64>> {
        (!self.bottom).then(|| self.stages.concat())
    }

    fn __repr__(&self) -> String {
        format!("Trace(bottom={}, stages={:?})", self.bottom, self.stages)
    }
}

/// Runs unit propagation. `engine` is `"staged"`, `"standard"` or `"fast"`.
#[pyfunction]
#[pyo3(signature = (formula, engine = "staged"))]
fn propagate(formula: &Formula, engine: &str) -> PyResult<Trace> {
    let r = match engine {
        "staged" => propagate_staged(&formula.inner),
        "standard" => propagate_standard(&formula.inner),
        "fast" => propagate_fast(&formula.inner),
        other => return Err(value_error(format!("unknown engine `{other}`"))),
    };
    Ok(Trace {
        bottom: r.is_bottom(),
        stages: r
            .stages()
            .iter()
            .map(|s| dimacs_list(s.iter().copied()))
            .collect(),
    })
}

/// The reified formula with each clause's role.
#[pyclass(name = "Reified", module = "pyunitres", frozen)]
struct Reified {
    inner: ReifiedFormula,
}

#[pymethods]
impl Reified {
    #[getter]
    fn formula(&self) -> Formula {
        Formula {
            inner: self.inner.formula().clone(),
        }
    }

    /// `(clause, role)` pairs in emission order.
    #[getter]
    fn clauses(&self) -> Vec<(Vec<i64>, String)> {
        self.inner
            .tagged_clauses()
            .iter()
            .map(|(c, r)| (dimacs_list(c.iter()), r.to_string()))
            .collect()
    }

    /// Variable id of the copy of `variable` at `stage` with the given sign.
    fn var(&self, variable: u32, stage: u32, positive: bool) -> PyResult<u32> {
        let sign = if positive {
            unitres::Sign::Plus
        } else {
            unitres::Sign::Minus
        };
        self.inner
            .index()
            .id(ReifiedVariable {
                base: var(variable)?,
                stage,
                sign,
            })
            .map(|v| v.id())
            .ok_or_else(|| value_error("variable or stage out of range"))
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs()
    }

    fn __len__(&self) -> usize {
        self.inner.tagged_clauses().len()
    }
}

#[pyfunction]
#[pyo3(signature = (formula, inject = Vec::new()))]
fn reify(formula: &Formula, inject: Vec<u32>) -> PyResult<Reified> {
    let inputs = inject
        .into_iter()
        .map(var)
        .collect::<PyResult<BTreeSet<_>>>()?;
    reify_injected(&formula.inner, &inputs)
        .map(|inner| Reified { inner })
        .map_err(value_error)
}

/// Returns `(direct, reified)`: whether propagation on `φ ∧ (l)` fails, and
/// whether the reified simulation produces `¬l`.
#[pyfunction]
fn failed_literal(formula: &Formula, lit: i64) -> PyResult<(bool, bool)> {
    let probe = literal(lit)?;
    let mut probed = formula.inner.clone();
    probed.add_clause(Clause::unit(probe));
    let (g, target) = failed_literal_formula(&formula.inner, probe);
    Ok((
        propagate_fast(&probed).is_bottom(),
        propagate_fast(&g).produced().contains(&target),
    ))
}

/// A propagator: formula, input variables and output variable.
#[pyclass(name = "Propagator", module = "pyunitres")]
struct Propagator {
    inner: CorePropagator,
}

#[pymethods]
impl Propagator {
    #[new]
    fn new(formula: &Formula, inputs: Vec<u32>, output: u32) -> PyResult<Self> {
        let inputs = inputs
            .into_iter()
            .map(var)
            .collect::<PyResult<BTreeSet<_>>>()?;
        CorePropagator::new(formula.inner.clone(), inputs, var(output)?)
            .map(|inner| Propagator { inner })
            .map_err(value_error)
    }

    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        CorePropagator::from_dimacs(text)
            .map(|inner| Propagator { inner })
            .map_err(value_error)
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs()
    }

    #[getter]
    fn formula(&self) -> Formula {
        Formula {
            inner: self.inner.formula().clone(),
        }
    }

    #[getter]
    fn inputs(&self) -> Vec<u32> {
        self.inner.input_order().iter().map(|v| v.id()).collect()
    }

    #[getter]
    fn output(&self) -> u32 {
        self.inner.output().id()
    }

    /// Filtering outcome (`fail`, `true`, `false` or `na`) on `{var: bool}`.
    #[pyo3(signature = (assignment = HashMap::new()))]
    fn eval(&self, assignment: HashMap<u32, bool>) -> PyResult<String> {
        let a = self::assignment(self.inner.inputs(), assignment)?;
        eval_filtering(&self.inner, &a)
            .map(|o| o.to_string())
            .map_err(value_error)
    }

    /// Matching outcome as a bool; raises on bottom.
    #[pyo3(signature = (assignment = HashMap::new()))]
    fn matches(&self, assignment: HashMap<u32, bool>) -> PyResult<bool> {
        let a = self::assignment(self.inner.inputs(), assignment)?;
        eval_matching(&self.inner, &a)
            .map(MatchingOutcome::is_yes)
            .map_err(value_error)
    }

    /// Every input with its outcome, as `(boolean representation, outcome)`.
    fn tabulate(&self) -> PyResult<Vec<(String, String)>> {
        let table = tabulate_fn(&self.inner).map_err(value_error)?;
        Ok(table
            .rows()
            .iter()
            .map(|(a, o)| {
                (
                    unitres::boolean_representation(a, table.order()).to_string(),
                    o.to_string(),
                )
            })
            .collect())
    }

    fn to_csv(&self) -> PyResult<String> {
        tabulate_fn(&self.inner)
            .map(|t| t.to_csv())
            .map_err(value_error)
    }

    /// `None` if the matching function is monotone, otherwise a description
    /// of a violating pair.
    fn check_monotone(&self) -> PyResult<Option<String>> {
        let table = tabulate_fn(&self.inner)
            .and_then(|t| t.to_matching())
            .map_err(value_error)?;
        Ok(check_table(&table).map(|cx| cx.describe(table.names())))
    }

    fn to_circuit(&self) -> Circuit {
        Circuit {
            inner: extract(&self.inner).circuit,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Propagator(inputs={:?}, output={})",
            self.inputs(),
            self.output()
        )
    }
}

/// A Boolean circuit over and/or/not/tie gates.
#[pyclass(name = "Circuit", module = "pyunitres")]
struct Circuit {
    inner: CoreCircuit,
}

#[pymethods]
impl Circuit {
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        CoreCircuit::from_text(text)
            .map(|inner| Circuit { inner })
            .map_err(value_error)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.inner.inputs().to_vec()
    }

    #[getter]
    fn num_gates(&self) -> usize {
        self.inner.num_gates()
    }

    fn is_monotone(&self) -> bool {
        self.inner.is_monotone()
    }

    fn evaluate(&self, bits: Vec<bool>) -> PyResult<bool> {
        self.inner.evaluate(&bits).map_err(value_error)
    }

    /// Compiles a monotone circuit with inputs `e1..e2n` over variables `1..=n`.
    fn to_propagator(&self) -> PyResult<Propagator> {
        let vars: Vec<Var> = (1..=(self.inner.inputs().len() / 2) as u32)
            .map(Var::new)
            .collect();
        circuit_to_propagator(&self.inner, &vars)
            .map(|inner| Propagator { inner })
            .map_err(value_error)
    }
}

/// Checks a CSV table of matching outcomes for monotonicity.
#[pyfunction]
fn check_monotone_csv(text: &str) -> PyResult<Option<String>> {
    let table: Table<MatchingOutcome> = Table::from_csv(text).map_err(value_error)?;
    Ok(check_table(&table).map(|cx| cx.describe(table.names())))
}

/// Runs a named suite (or `all`) on `count` seeded instances; returns
/// `(suite, seed, passed, detail)` tuples.
#[pyfunction]
fn run_suite(
    py: Python<'_>,
    name: &str,
    seed: u64,
    count: usize,
) -> PyResult<Vec<(String, u64, bool, Option<String>)>> {
    let results = py.detach(|| run(name, seed, count)).map_err(value_error)?;
    Ok(results
        .into_iter()
        .map(|r| (r.suite.clone(), r.seed, r.passed(), r.failure))
        .collect())
}

#[pymodule]
fn pyunitres(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Formula>()?;
    m.add_class::<Trace>()?;
    m.add_class::<Reified>()?;
    m.add_class::<Propagator>()?;
    m.add_class::<Circuit>()?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(reify, m)?)?;
    m.add_function(wrap_pyfunction!(failed_literal, m)?)?;
    m.add_function(wrap_pyfunction!(check_monotone_csv, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
