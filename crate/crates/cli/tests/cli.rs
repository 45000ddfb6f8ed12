use std::fs;
use std::path::PathBuf;
use std::process::Command;

use unitres::{
    circuit_to_propagator, dimacs, extract_circuit, reify, tabulate, Circuit, CnfFormula,
    Propagator, ReifiedFormula, Var,
};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn text(name: &str) -> String {
    fs::read_to_string(data(name)).unwrap()
}

/// Runs the binary and returns (exit code, stdout, stderr).
fn unitres(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_unitres"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn propagate_prints_production_order() {
    let (code, out, _) = unitres(&["propagate", &path("three_clause.cnf")]);
    assert_eq!(code, 0);
    assert_eq!(out, "b a\n");
}

#[test]
fn propagate_trace_lists_stages() {
    let (code, out, _) = unitres(&["propagate", &path("three_clause.cnf"), "--trace"]);
    assert_eq!(code, 0);
    assert_eq!(out, "U1: b\nU2: a\nU3: \nU4: \nU5: \nb a\n");
}

#[test]
fn propagate_reports_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("conflict.cnf");
    fs::write(&file, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let (code, out, _) = unitres(&["propagate", file.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, "UNSAT(UP)\n"));
}

#[test]
fn reify_matches_golden_and_library() {
    let (code, out, _) = unitres(&["reify", &path("two_units.cnf")]);
    assert_eq!(code, 0);
    assert_eq!(out, text("two_units.reified.cnf"));
    let lib = reify(&dimacs::parse_formula(&text("two_units.cnf")).unwrap());
    let parsed = ReifiedFormula::from_dimacs(&out).unwrap();
    assert_eq!(parsed.formula(), lib.formula());
    assert_eq!(parsed.tagged_clauses(), lib.tagged_clauses());
}

#[test]
fn reify_injected_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sigma.cnf");
    let (code, out, _) = unitres(&[
        "reify",
        &path("two_units.cnf"),
        "--inject",
        "v2",
        "-o",
        file.to_str().unwrap(),
    ]);
    assert_eq!((code, out.as_str()), (0, ""));
    let written = fs::read_to_string(&file).unwrap();
    assert_eq!(written.matches("c role inject").count(), 2);
    assert!(ReifiedFormula::from_dimacs(&written)
        .unwrap()
        .injected()
        .contains(&Var::new(2)));
}

#[test]
fn failed_literal_routes_agree() {
    let (code, out, _) = unitres(&[
        "failed-literal",
        &path("three_clause.cnf"),
        "--literal",
        "-b",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "direct: fails\nreified: fails\nagree: yes\n");
    let (code, out, _) = unitres(&[
        "failed-literal",
        &path("three_clause.cnf"),
        "--literal",
        "c",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "direct: holds\nreified: holds\nagree: yes\n");
}

#[test]
fn eval_first_table() {
    let p = path("first_table.prop");
    let cases = [
        ("v1=x,v2=x", "na"),
        ("v1=1,v2=x", "true"),
        ("v1=0,v2=1", "true"),
        ("v1=0,v2=0", "na"),
    ];
    for (assign, want) in cases {
        let (code, out, _) = unitres(&["eval", &p, "--assign", assign]);
        assert_eq!((code, out.trim()), (0, want), "{assign}");
    }
}

#[test]
fn tabulate_matches_library() {
    let (code, out, _) = unitres(&["tabulate", &path("first_table.prop")]);
    assert_eq!(code, 0);
    let p = Propagator::from_dimacs(&text("first_table.prop")).unwrap();
    assert_eq!(out, tabulate(&p).unwrap().to_csv());
    assert_eq!(out.lines().count(), 10);
}

#[test]
fn compile_circuit1() {
    let (code, out, _) = unitres(&["compile-circuit", &path("circuit1.circuit")]);
    assert_eq!(code, 0);
    let p = Propagator::from_dimacs(&out).unwrap();
    let expected = CnfFormula::from_dimacs_clauses(&[&[-1, -2, 3], &[-3, 4], &[2, 4]]);
    assert_eq!(
        p.formula()
            .clauses()
            .collect::<std::collections::BTreeSet<_>>(),
        expected.clauses().collect()
    );
    let c = Circuit::from_text(&text("circuit1.circuit")).unwrap();
    assert_eq!(
        p,
        circuit_to_propagator(&c, &[Var::new(1), Var::new(2)]).unwrap()
    );
}

#[test]
fn extract_circuit_matches_golden_and_library() {
    let (code, out, _) = unitres(&["extract-circuit", &path("first_table.prop")]);
    assert_eq!(code, 0);
    assert_eq!(out, text("first_table.circuit"));
    let p = Propagator::from_dimacs(&text("first_table.prop")).unwrap();
    assert_eq!(
        Circuit::from_text(&out).unwrap(),
        extract_circuit(&p).circuit
    );
}

#[test]
fn check_monotone_verdicts() {
    let (code, out, _) = unitres(&["check-monotone", &path("first_table.prop")]);
    assert_eq!((code, out.as_str()), (0, "monotone\n"));
    let (code, out, _) = unitres(&["check-monotone", &path("g.csv")]);
    assert_eq!(code, 1);
    assert_eq!(out, "monotonicity-violation I={} (yes) J={v} (no)\n");
}

#[test]
fn verify_reports_one_line_per_instance() {
    let (code, out, _) = unitres(&["verify", "counting", "--seed", "5", "--count", "4"]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "counting 5 pass\ncounting 6 pass\ncounting 7 pass\ncounting 8 pass\n"
    );
}

#[test]
fn usage_and_input_errors_exit_2() {
    assert_eq!(unitres(&[]).0, 2);
    assert_eq!(unitres(&["frobnicate"]).0, 2);
    assert_eq!(unitres(&["verify", "counting"]).0, 2, "--seed is required");
    assert_eq!(unitres(&["verify", "nope", "--seed", "1"]).0, 2);
    let (code, _, err) = unitres(&["eval", &path("missing.prop")]);
    assert_eq!(code, 2);
    assert!(err.contains("missing.prop"));
    let (code, _, err) = unitres(&["eval", &path("first_table.prop"), "--assign", "q=1"]);
    assert_eq!(code, 2);
    assert!(err.contains("`q`"), "{err}");
}

#[test]
fn library_entry_point_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = unitres_cli::run(
        ["unitres", "propagate", &path("three_clause.cnf")],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert_eq!(
        String::from_utf8(out).unwrap(),
        unitres(&["propagate", &path("three_clause.cnf")]).1
    );
}
