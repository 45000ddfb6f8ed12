//! Unit resolution viewed as a model of computation.

pub mod circuit;
pub mod cnf;
pub mod dimacs;
pub mod error;
pub mod propagation;
pub mod propagator;
pub mod reify;
pub mod table;
pub mod translate;
pub mod verify;

pub use circuit::{Circuit, Gate, GateKind};
pub use cnf::{restrict, Clause, CnfFormula, Literal, PartialAssignment, SymbolTable, Var};
pub use error::{Error, Result};
pub use propagation::{
    propagate, propagate_staged, propagate_staged_with, propagate_standard, propagation_stage,
    Outcome, PropagationResult, StagedOptions,
};
pub use propagator::{
    eval_filtering, eval_matching, eval_nu, filtering_to_matchings, matchings_to_filtering,
    nu_to_propagator, propagator_to_nu, reify_propagator, tabulate, NuPropagator, Propagator,
    ReifiedPropagator,
};
pub use reify::{
    delta, failed_literal_formula, reify, reify_injected, ReifiedFormula, ReifiedIndex,
    ReifiedVariable, Role, Sign,
};
pub use table::{
    boolean_representation, enumerate_assignments, BooleanRepresentation, FilteringOutcome,
    MatchingOutcome, Table,
};
pub use translate::{
    circuit_to_propagator, extract_circuit, propagator_to_circuit, Extraction, NodeIndex,
};
pub use verify::{
    check_equiv_propagator_circuit, check_monotone, run_suite, CheckResult, Counterexample,
};
