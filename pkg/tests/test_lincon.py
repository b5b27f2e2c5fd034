import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from numloop import lincon
from numloop.bruteforce import cond_mask, grid
from numloop.lincon import LinIneq
from numloop.syntax import parse_condition, parse_term

from .strategies import conditions, names

C = parse_condition
PTS = {k: grid(k, -20, 20) for k in (1, 2, 3)}
MANY = settings(max_examples=1000, deadline=None)


def test_normalize_strict():
    i = lincon.normalize(">", parse_term("X"), parse_term("Y"))
    assert i == LinIneq.make({"X": 1, "Y": -1}, -1)


def test_gcd_is_not_tightened():
    # 2X >= 1 /\ 2X =< 1 has the rational model 1/2
    assert lincon.satisfiable(lincon.Condition.of(LinIneq.make({"X": 2}, -1), LinIneq.make({"X": -2}, 1)))


def test_render_disjunction():
    assert lincon.render(C("$1 =< 0 \\/ $1 > 5")) == "$1 =< 0 \\/ $1 >= 6"


def test_negation_example():
    assert lincon.render(lincon.negate(C("$1 > 5 /\\ $1 =< 10"))) == "$1 =< 5 \\/ $1 >= 11"


def test_simplify_examples():
    assert lincon.render(lincon.simplify(C("$1 > 10 /\\ $1 > 5"))) == "$1 >= 11"
    assert lincon.render(C("$1 >= 0 \\/ ($1 >= 3 /\\ $2 >= 1)")) == "$1 >= 0"
    assert C("$1 =< 6 \\/ $1 >= 7").is_true()
    assert lincon.render(C("$1 =< 0 \\/ ($1 >= 6 /\\ $1 =< 10) \\/ $1 >= 11")) == "$1 =< 0 \\/ $1 >= 6"


def test_entailment_and_elimination():
    assert lincon.entails(C("$1 > $2 /\\ $2 > 0"), C("$1 > 0"))
    assert not lincon.entails(C("$1 > 0"), C("$1 > 1"))
    rows = lincon.eliminate({LinIneq.make({"X": 1, "Y": -1}, 0), LinIneq.make({"Y": 1}, -2)}, {"Y"})
    assert rows == frozenset({LinIneq.make({"X": 1}, -2)})


def test_fm_capacity(monkeypatch):
    monkeypatch.setattr(lincon, "FM_CAP", 3)
    rows = [LinIneq.make({"X": 1, "Y": a}, a) for a in (-1, 1, 2, -2, 3, -3)]
    assert lincon.conj_satisfiable(rows)  # over the cap: assume satisfiable
    with pytest.raises(lincon.CapacityError):
        lincon.fm_project(rows, ["Y"])


def test_instantiate():
    c = lincon.instantiate(C("$1 > $2"), [parse_term("X + 1"), parse_term("Y")])
    assert c == lincon.Condition.of(LinIneq.make({"X": 1, "Y": -1}, 0))
    with pytest.raises(lincon.NonlinearAtom):
        lincon.instantiate(C("$1 > 0"), [parse_term("X * Y")])


def test_partition():
    assert lincon.is_partition([C("$1 > 10"), C("$1 > 5 /\\ $1 =< 10"), C("$1 =< 5")])
    assert not lincon.is_partition([C("$1 > 10"), C("$1 =< 10 /\\ $1 > 6")])
    assert not lincon.is_partition([C("$1 > 0"), C("$1 >= 0")])


# ---- brute-force properties on [-20, 20]^k ----------------------------------

def mask(c, k):
    return cond_mask(c, names(k), PTS[k])


@MANY
@given(st.integers(1, 3).flatmap(lambda k: st.tuples(st.just(k), conditions(k))))
def test_negation_exact(kc):
    k, c = kc
    assert np.array_equal(mask(lincon.negate(c), k), ~mask(c, k))


@MANY
@given(st.integers(1, 3).flatmap(lambda k: st.tuples(st.just(k), conditions(k))))
def test_simplify_preserves_models(kc):
    k, c = kc
    assert np.array_equal(mask(lincon.simplify(c), k), mask(c, k))


@MANY
@given(st.integers(2, 3).flatmap(lambda k: st.tuples(st.just(k), conditions(k), st.integers(1, k))))
def test_projection_sound(kcd):
    k, c, dropped = kcd
    keep = [v for v in names(k) if v != f"${dropped}"]
    proj = lincon.project(c, keep)
    assert f"${dropped}" not in proj.variables()
    # every model of c satisfies the projection
    assert not (mask(c, k) & ~mask(proj, k)).any()


@MANY
@given(st.integers(1, 3).flatmap(lambda k: st.tuples(st.just(k), conditions(k), conditions(k))))
def test_entailment_sound(kab):
    k, a, b = kab
    if lincon.entails(a, b):
        assert not (mask(a, k) & ~mask(b, k)).any()


@MANY
@given(st.integers(1, 3).flatmap(lambda k: st.tuples(st.just(k), conditions(k), conditions(k))))
def test_conjoin_disjoin(kab):
    k, a, b = kab
    assert np.array_equal(mask(lincon.conjoin(a, b), k), mask(a, k) & mask(b, k))
    assert np.array_equal(mask(lincon.disjoin(a, b), k), mask(a, k) | mask(b, k))


@MANY
@given(st.integers(1, 2).flatmap(lambda k: st.tuples(st.just(k), conditions(k))))
def test_render_round_trip(kc):
    k, c = kc
    back = parse_condition(lincon.render(c))
    assert lincon.equivalent(back, c)
    assert np.array_equal(mask(back, k), mask(c, k))
