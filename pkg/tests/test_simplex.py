from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numloop.simplex import Row, Unbounded, feasible, minimize


def test_small_lp():
    rows = [Row({"x": 1, "y": 1}, ">=", 2), Row({"x": 1, "y": -1}, "=", 1)]
    val, sol = minimize({"x": 1, "y": 1}, rows)
    assert val == 2 and sol["x"] == Fraction(3, 2) and sol["y"] == Fraction(1, 2)


def test_infeasible():
    assert minimize({"x": 1}, [Row({"x": 1}, "<=", -1)]) is None
    assert not feasible([Row({"x": 1}, "<=", -1)])


def test_unbounded():
    with pytest.raises(Unbounded):
        minimize({"x": -1}, [Row({"x": 1}, ">=", 0)])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.sampled_from(["<=", ">=", "="]),
                          st.integers(-5, 5)), min_size=1, max_size=4))
def test_feasibility_against_grid(spec):
    rows = [Row({"x": a, "y": b}, op, c) for a, b, op, c in spec]

    def ok(x, y):
        for a, b, op, c in spec:
            v = a * x + b * y
            if (op == "<=" and v > c) or (op == ">=" and v < c) or (op == "=" and v != c):
                return False
        return True

    hit = any(ok(Fraction(x, 6), Fraction(y, 6)) for x in range(0, 61) for y in range(0, 61))
    if hit:
        assert feasible(rows)
    res = minimize({"x": 1, "y": 1}, rows)
    if res is not None:
        _, sol = res
        x, y = sol.get("x", 0), sol.get("y", 0)
        assert x >= 0 and y >= 0 and ok(x, y)
