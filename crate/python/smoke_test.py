"""Smoke test for the pyunitres extension module."""

import pyunitres as ur


def main():
    # (a | -b) & (b) & (-a | c | -d)
    f = ur.Formula([[1, -2], [2], [-1, 3, -4]])
    for engine in ("staged", "standard", "fast"):
        assert set(ur.propagate(f, engine).literals()) == {1, 2}, engine
    trace = ur.propagate(f)
    assert trace.stages[:2] == [[2], [1]], trace

    # (a) & (-a | b)
    sigma = ur.reify(ur.Formula([[1], [-1, 2]]))
    roles = [role for _, role in sigma.clauses]
    assert len(sigma) == 14 and roles.count("init0") == 1
    assert sigma.var(1, 0, True) in [lit for c, _ in sigma.clauses for lit in c]

    assert ur.failed_literal(f, -2) == (True, True)
    assert ur.failed_literal(f, 3) == (False, False)

    # (-v1 | s) & (-v2 | s)
    p = ur.Propagator(ur.Formula([[-1, 3], [-2, 3]]), [1, 2], 3)
    assert p.eval({}) == "na"
    assert p.eval({1: True}) == "true"
    assert p.matches({1: False, 2: True})
    rows = dict(p.tabulate())
    assert len(rows) == 9 and rows["0110"] == "true" and rows["0011"] == "na"
    assert p.check_monotone() is None
    assert ur.Propagator.from_dimacs(p.to_dimacs()).inputs == [1, 2]

    c = ur.Circuit.from_text("input e1\ninput e2\ninput e3\ninput e4\nand u1 e1 e2\nor u2 u1 e4\noutput u2\n")
    q = c.to_propagator()
    assert sorted(map(sorted, q.formula.clauses)) == [[-3, 4], [-2, -1, 3], [2, 4]]
    extracted = q.to_circuit()
    assert extracted.is_monotone()
    for assign in ({}, {1: True}, {2: False}, {1: True, 2: True}):
        bits = [assign.get(1) is True, assign.get(2) is True, assign.get(1) is False, assign.get(2) is False]
        assert q.matches(assign) == c.evaluate(bits) == extracted.evaluate(bits), assign

    g = "assignment,boolean,outcome\nv=x,00,yes\nv=1,10,no\nv=0,01,yes\n"
    assert ur.check_monotone_csv(g) == "monotonicity-violation I={} (yes) J={v} (no)"

    results = ur.run_suite("counting", 1, 5)
    assert len(results) == 5 and all(passed for _, _, passed, _ in results)

    try:
        ur.Propagator(ur.Formula([[1, 2]]), [3], 1)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid propagator accepted")

    print("pyunitres smoke test passed")


if __name__ == "__main__":
    main()
