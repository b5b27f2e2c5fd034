import numpy as np
from hypothesis import given, settings

from numloop import lincon
from numloop.acceptability import (
    Failed, NeedsCondition, Solved, check_certificate, decrease_obligations, farkas_system,
    level_map_template, solve,
)
from numloop.bruteforce import conj_mask, grid
from numloop.driver import first_round
from numloop.prep import integer_positions, partially_normalise
from numloop.syntax import Pred, Var, parse_condition

from .strategies import conjunctions, names

C = parse_condition


def obligations(prog, q):
    pm = integer_positions(prog)
    pa = first_round(prog, q)
    return pa, decrease_obligations(pa, pm)


def test_template_shapes():
    t = level_map_template(Pred("p", 1, C("$1 > 0 /\\ $1 < 9")))
    assert len(t.terms) == 2 and str(t).startswith("|p{")
    assert level_map_template(Pred("p", 1, C("$1 > 0 \\/ $1 < -9"))).terms == ()
    assert level_map_template(Pred("p", 1)).terms == ()


@settings(max_examples=300, deadline=None)
@given(conjunctions(2))
def test_primitives_nonnegative_on_their_adornment(conj):
    a = lincon.Condition.of(*conj)
    if not lincon.satisfiable(a) or not a.is_conjunction():
        return
    t = level_map_template(Pred("p", 2, a))
    pts = grid(2, -20, 20)
    inside = conj_mask(a.conjuncts(), names(2), pts)
    for prim in t.terms:
        co, k = prim.form(tuple(Var(v) for v in names(2)))
        val = k + sum(c * pts[:, int(v[1:]) - 1] for v, c in co.items())
        assert np.all(val[inside] >= 0)


def test_count_up_solved_with_valid_certificate(corpus):
    p = corpus("count_up")
    pa, obls = obligations(p, Pred("p", 1))
    assert obls
    out = solve(farkas_system(obls))
    assert isinstance(out, Solved)
    assert all(v >= 0 for v in out.assignment.values())
    for o in obls:
        assert check_certificate(o, out.assignment) == 0


def test_certificate_check_catches_zero_mapping(corpus):
    p = corpus("count_up")
    _, obls = obligations(p, Pred("p", 1))
    assert any(check_certificate(o, {}) > 0 for o in obls)


def test_solution_satisfies_rows(corpus):
    p = corpus("count_up")
    _, obls = obligations(p, Pred("p", 1))
    sys_ = farkas_system(obls)
    assert sys_.render()
    out = solve(sys_)
    assert isinstance(out, Solved)


def test_subtract_loop_asks_for_condition(corpus):
    p = corpus("gcdlike")
    _, obls = obligations(p, Pred("q", 2))
    out = solve(farkas_system(obls))
    assert isinstance(out, NeedsCondition)
    assert out.predicate.name == "q"
    assert lincon.entails(C("$1 > $2 /\\ $2 >= 0"), out.condition)


def test_loop_fails(corpus):
    p = corpus("q_simple")
    _, obls = obligations(p, Pred("q", 1))
    out = solve(farkas_system(obls), {})
    assert isinstance(out, (Failed, NeedsCondition))
    if isinstance(out, NeedsCondition):
        # any proposal must exclude the looping points 1..5
        assert not lincon.satisfiable(lincon.conjoin(out.condition, C("$1 >= 1 /\\ $1 =< 5")))
