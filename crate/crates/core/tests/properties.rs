use std::collections::BTreeSet;

use proptest::prelude::*;
use unitres::verify::{random_monotone_circuit, random_propagator};
use unitres::{
    boolean_representation, check_monotone, circuit_to_propagator, dimacs, enumerate_assignments,
    eval_matching, propagate, propagate_staged, propagate_standard, reify, restrict, tabulate,
    BooleanRepresentation, Circuit, CnfFormula, FilteringOutcome, Literal, PartialAssignment,
    Propagator, ReifiedFormula, Role, Table, Var,
};

/// Clauses over `1..=n`, possibly with duplicates, tautologies or empties.
fn formula(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
    (1..=max_vars).prop_flat_map(move |n| {
        let lit = (1..=n as i64, any::<bool>()).prop_map(|(v, pos)| if pos { v } else { -v });
        prop::collection::vec(prop::collection::vec(lit, 0..=4), 0..=max_clauses).prop_map(
            move |cs| {
                let refs: Vec<&[i64]> = cs.iter().map(Vec::as_slice).collect();
                let mut f = CnfFormula::from_dimacs_clauses(&refs);
                for v in 1..=n {
                    f.declare(Var::new(v));
                }
                f
            },
        )
    })
}

fn assignment_over(vars: Vec<Var>) -> impl Strategy<Value = PartialAssignment> {
    let n = vars.len();
    prop::collection::vec(0u8..3, n).prop_map(move |vals| {
        let lits = vars.iter().zip(&vals).filter_map(|(&v, &x)| match x {
            1 => Some(v.pos()),
            2 => Some(v.neg()),
            _ => None,
        });
        PartialAssignment::from_literals(vars.iter().copied(), lits).unwrap()
    })
}

fn literal_sets(f: &CnfFormula) -> [(bool, Option<BTreeSet<Literal>>); 3] {
    [propagate_standard(f), propagate_staged(f), propagate(f)]
        .map(|r| (r.is_bottom(), r.literals().cloned()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn engines_agree(f in formula(8, 24)) {
        let [a, b, c] = literal_sets(&f);
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(&b, &c);
        if !a.0 {
            prop_assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn staged_trace_is_cumulative_and_disjoint(f in formula(8, 24)) {
        let r = propagate_staged(&f);
        let mut seen = BTreeSet::new();
        for stage in r.stages() {
            prop_assert!(stage.is_disjoint(&seen));
            seen.extend(stage.iter().copied());
        }
        prop_assert_eq!(r.rounds(), f.num_vars() + 1);
    }

    #[test]
    fn propagation_grows_with_the_assignment(
        (f, i, j) in formula(6, 14).prop_flat_map(|f| {
            let vars: Vec<Var> = f.variables().iter().copied().collect();
            (Just(f), assignment_over(vars.clone()), assignment_over(vars))
        })
    ) {
        // I ∩ J ⊆ I: anything produced from the smaller assignment is kept.
        let common: Vec<Literal> = i.literals().intersection(j.literals()).copied().collect();
        let small = PartialAssignment::from_literals(i.universe().iter().copied(), common).unwrap();
        let big = propagate(&restrict(&f, &i));
        let little = propagate(&restrict(&f, &small));
        if !big.is_bottom() && !little.is_bottom() {
            let produced = big.produced();
            for l in little.produced() {
                prop_assert!(produced.contains(l) || i.contains(*l));
            }
        }
        if little.is_bottom() {
            prop_assert!(big.is_bottom());
        }
    }

    #[test]
    fn reified_counts(f in formula(5, 10)) {
        let sigma = reify(&f);
        let n = f.num_vars();
        let wide: usize = f.clauses().filter(|c| c.len() >= 2).map(|c| c.len()).sum();
        prop_assert_eq!(sigma.index().len(), 2 * n * (n + 2));
        prop_assert_eq!(sigma.count(|r| matches!(r, Role::Propagation(_))), 2 * n * n);
        prop_assert_eq!(sigma.count(|r| matches!(r, Role::Deduction(_))), n * wide);
    }

    #[test]
    fn reified_dimacs_round_trip(f in formula(4, 8)) {
        let sigma = reify(&f);
        let back = ReifiedFormula::from_dimacs(&sigma.to_dimacs()).unwrap();
        prop_assert_eq!(back.formula(), sigma.formula());
        prop_assert_eq!(back.tagged_clauses(), sigma.tagged_clauses());
    }

    #[test]
    fn dimacs_round_trip(f in formula(8, 20)) {
        prop_assert_eq!(dimacs::parse_formula(&dimacs::write(&f)).unwrap(), f);
    }

    #[test]
    fn enumeration_is_complete(n in 0usize..=6) {
        let vars: Vec<Var> = (1..=n as u32).map(Var::new).collect();
        let all = enumerate_assignments(&vars).unwrap();
        prop_assert_eq!(all.len(), 3usize.pow(n as u32));
        let distinct: BTreeSet<Vec<Literal>> = all.iter().map(|a| a.literals().iter().copied().collect()).collect();
        prop_assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn boolean_representation_round_trip(a in assignment_over((1..=6).map(Var::new).collect())) {
        let order: Vec<Var> = (1..=6).map(Var::new).collect();
        let bits = boolean_representation(&a, &order);
        prop_assert!(bits.is_consistent());
        prop_assert_eq!(bits.to_string().parse::<BooleanRepresentation>().unwrap(), bits.clone());
        prop_assert_eq!(bits.to_assignment(&order).unwrap(), Some(a));
    }

    #[test]
    fn matching_tables_are_monotone(n in 1usize..=4, k in 0usize..=8, seed in any::<u64>()) {
        let p = random_propagator(n, k, 3, seed);
        let table = tabulate(&p).unwrap();
        if table.rows().iter().all(|(_, o)| *o != FilteringOutcome::Fail) {
            prop_assert_eq!(check_monotone(&table.to_matching().unwrap()), None);
        }
    }

    #[test]
    fn table_csv_round_trip(n in 1usize..=3, k in 0usize..=6, seed in any::<u64>()) {
        let p = random_propagator(n, k, 3, seed);
        let table = tabulate(&p).unwrap();
        // Variable ids are not stored, so compare row by row through the bits.
        let back: Table<FilteringOutcome> = Table::from_csv(&table.to_csv()).unwrap();
        let rows = |t: &Table<FilteringOutcome>| -> Vec<(String, FilteringOutcome)> {
            t.rows().iter().map(|(a, o)| (boolean_representation(a, t.order()).to_string(), *o)).collect()
        };
        prop_assert_eq!(rows(&back), rows(&table));
        prop_assert_eq!(back.to_csv(), table.to_csv());
    }

    #[test]
    fn circuit_rewrites_keep_the_function(pairs in 1usize..=3, gates in 0usize..=10, seed in any::<u64>()) {
        let c = random_monotone_circuit(2 * pairs, gates, seed);
        let table = c.compute_table().unwrap();
        prop_assert_eq!(c.prune_dead().compute_table().unwrap(), table.clone());
        prop_assert_eq!(c.inline_ties().compute_table().unwrap(), table.clone());
        prop_assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn compiled_circuit_matches(pairs in 1usize..=3, gates in 0usize..=8, seed in any::<u64>()) {
        let c = random_monotone_circuit(2 * pairs, gates, seed);
        let vars: Vec<Var> = (1..=pairs as u32).map(Var::new).collect();
        let p: Propagator = circuit_to_propagator(&c, &vars).unwrap();
        for a in enumerate_assignments(&vars).unwrap() {
            let bits = boolean_representation(&a, &vars);
            prop_assert_eq!(eval_matching(&p, &a).unwrap().is_yes(), c.evaluate(bits.bits()).unwrap());
        }
    }
}
