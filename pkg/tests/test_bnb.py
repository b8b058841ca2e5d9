"""Branch-and-bound tests against exhaustive 0/1 enumeration."""

import itertools

import numpy as np
import pytest

from faircg.lp import GE, LE, LinearProgram, solve_lp
from faircg.bnb import IntegerProgram, MIPResult, solve_mip


def _random_binary_ip(rng, n_max=10, m_max=6):
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    lp = LinearProgram()
    for _ in range(n):
        lp.add_var(obj=float(rng.integers(-5, 6)), ub=1.0)
    for _ in range(m):
        coeffs = {j: float(rng.integers(-4, 5)) for j in range(n) if rng.random() < 0.6}
        if not coeffs:
            continue
        rel = LE if rng.random() < 0.7 else GE
        lp.add_row(coeffs, rel, float(rng.integers(-3, 6)))
    return IntegerProgram(lp, list(range(n)))


def _enumerate_optimum(prob):
    lp = prob.lp
    n = lp.n_vars
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=n):
        ok = True
        for coeffs, rel, rhs in lp.rows:
            lhs = sum(c * bits[j] for j, c in coeffs.items())
            if rel == LE and lhs > rhs + 1e-9:
                ok = False
                break
            if rel == GE and lhs < rhs - 1e-9:
                ok = False
                break
        if ok:
            val = sum(lp.obj[j] * bits[j] for j in range(n))
            if best is None or val < best:
                best = val
    return best


def test_matches_enumeration():
    rng = np.random.default_rng(11)
    for _ in range(120):
        prob = _random_binary_ip(rng)
        res = solve_mip(prob, time_limit=30)
        truth = _enumerate_optimum(prob)
        if truth is None:
            assert res.status == "infeasible"
        else:
            assert res.status == "optimal"
            assert res.objective == pytest.approx(truth, abs=1e-6)


def test_knapsack():
    # max 10a + 13b + 7c s.t. 3a + 4b + 2c <= 6  -> b + c (value 20)
    lp = LinearProgram()
    a = lp.add_var(obj=-10.0, ub=1.0)
    b = lp.add_var(obj=-13.0, ub=1.0)
    c = lp.add_var(obj=-7.0, ub=1.0)
    lp.add_row({a: 3.0, b: 4.0, c: 2.0}, LE, 6.0)
    res = solve_mip(IntegerProgram(lp, [a, b, c]))
    assert res.objective == pytest.approx(-20.0)
    assert round(res.x[a]) == 0 and round(res.x[b]) == 1 and round(res.x[c]) == 1


def test_pool_is_strictly_improving():
    rng = np.random.default_rng(5)
    for _ in range(30):
        prob = _random_binary_ip(rng)
        res = solve_mip(prob, time_limit=30)
        objs = [o for _x, o in res.pool]
        assert objs == sorted(objs, reverse=True)
        assert all(a > b + 1e-9 for a, b in zip(objs, objs[1:]))
        if res.status == "optimal":
            assert objs and objs[-1] == pytest.approx(res.objective)


def test_feasible_solutions_are_feasible_and_deduped():
    rng = np.random.default_rng(9)
    prob = _random_binary_ip(rng, n_max=8)
    res = solve_mip(prob, time_limit=30)
    keys = set()
    for x, obj in res.feasible_solutions:
        key = tuple(int(round(v)) for v in x[: prob.lp.n_vars])
        assert key not in keys
        keys.add(key)
        for coeffs, rel, rhs in prob.lp.rows:
            lhs = sum(c * x[j] for j, c in coeffs.items())
            assert (lhs <= rhs + 1e-6) if rel == LE else (lhs >= rhs - 1e-6)


def test_general_integer_variables():
    # min -x - 2y, 2x + 5y <= 13, x <= 4, integers -> x=4, y=1
    lp = LinearProgram()
    x = lp.add_var(obj=-1.0, ub=4.0)
    y = lp.add_var(obj=-2.0)
    lp.add_row({x: 2.0, y: 5.0}, LE, 13.0)
    res = solve_mip(IntegerProgram(lp, [x, y]))
    assert res.objective == pytest.approx(-6.0)


def test_unbounded_root_raises():
    lp = LinearProgram()
    lp.add_var(obj=-1.0)
    with pytest.raises(ValueError):
        solve_mip(IntegerProgram(lp, [0]))


def test_infeasible_status():
    lp = LinearProgram()
    x = lp.add_var(obj=1.0, ub=1.0)
    lp.add_row({x: 1.0}, GE, 2.0)
    assert solve_mip(IntegerProgram(lp, [x])).status == "infeasible"


def test_timeout_bound_stays_valid():
    rng = np.random.default_rng(21)
    # a harder instance so the node limit actually truncates the search
    n = 14
    lp = LinearProgram()
    for _ in range(n):
        lp.add_var(obj=float(rng.uniform(-1, 0)), ub=1.0)
    for _ in range(10):
        coeffs = {j: float(rng.uniform(-1, 1)) for j in range(n)}
        lp.add_row(coeffs, LE, 0.5)
    prob = IntegerProgram(lp, list(range(n)))
    full = solve_mip(prob, time_limit=60)
    truncated = solve_mip(prob, time_limit=60, node_limit=5)
    assert truncated.bound <= full.objective + 1e-6


def test_gap_property():
    res = MIPResult(status="optimal", x=np.zeros(1), objective=3.0, bound=2.0)
    assert res.gap == pytest.approx(1.0)
    assert MIPResult(status="infeasible").gap == np.inf
