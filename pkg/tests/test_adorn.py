import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from numloop import lincon
from numloop.adorn import (
    adorn_program, bridge_clauses, collect_guards, extend_adornments, guard_tuned_set, is_guard_tuned,
    remove_irrelevant,
)
from numloop.bruteforce import cond_mask, grid
from numloop.driver import first_round
from numloop.prep import dependency_graph, integer_positions, partially_normalise
from numloop.syntax import Pred, parse_condition, parse_program, render_program

from .strategies import conditions

C = parse_condition


def same_sets(xs, ys):
    return len(xs) == len(ys) and all(any(lincon.equivalent(x, y) for y in ys) for x in xs)


def test_two_nested_guards():
    cells = guard_tuned_set([C("$1 > 5"), C("$1 > 10")])
    assert same_sets(cells, [C("$1 > 10"), C("$1 > 5 /\\ $1 =< 10"), C("$1 =< 5")])


def test_no_guards_gives_one_cell():
    assert guard_tuned_set([]) == [lincon.TRUE]


def test_collect_and_tuned(corpus):
    p = corpus("overlap")
    pm = integer_positions(p)
    r = Pred("r", 1)
    guards = collect_guards(p, pm, r)
    cells = guard_tuned_set(guards)
    assert is_guard_tuned(cells, p, pm, r)
    assert not is_guard_tuned([lincon.TRUE], p, pm, r)


@settings(max_examples=300, deadline=None)
@given(st.lists(conditions(2), min_size=1, max_size=3))
def test_cells_partition_the_box(conds):
    names = ["$1", "$2"]
    pts = grid(2, -20, 20)
    cells = guard_tuned_set(conds)
    count = sum(cond_mask(c, names, pts).astype(int) for c in cells)
    assert np.all(count == 1)
    for cell in cells:
        m = cond_mask(cell, names, pts)
        for g in conds:
            gm = cond_mask(g, names, pts)
            assert not np.any(m & gm) or not np.any(m & ~gm)


def test_extension_adds_argument_two(corpus):
    p = corpus("permuted")
    pm = integer_positions(p)
    P = Pred("p", 2)
    ext = extend_adornments({P: collect_guards(p, pm, P)}, p, pm)
    assert any("$2" in c.variables() for c in ext[P])


def test_oscillate_heads(corpus):
    p = corpus("oscillate")
    pa = first_round(p, Pred("p", 1))
    heads = {}
    for cl, i in zip(pa.clauses, pa.provenance):
        heads.setdefault(i, set()).add(cl.head.adornment)
    assert len(heads[0]) == 1 and lincon.equivalent(heads[0].pop(), C("$1 > 1 /\\ $1 < 1000"))
    assert len(heads[1]) == 1 and lincon.equivalent(heads[1].pop(), C("$1 < -1 /\\ $1 > -1000"))


def test_bridges_and_removal():
    p = parse_program(":- analyze(r/1).\nr(X) :- X > 5.\nr(X) :- X > 10, r(X).")
    pm = integer_positions(p)
    R = Pred("r", 1)
    cells = guard_tuned_set(collect_guards(p, pm, R))
    pa = adorn_program(partially_normalise(p, pm), {R: cells}, R, pm)
    assert len(bridge_clauses(pa.adornments, R)) == 3
    small = remove_irrelevant(pa, C("$1 =< 5"), R)
    assert {c.head.pred.adornment for c in small.clauses} <= {a for a in cells if lincon.entails(a, C("$1 =< 5"))}
    assert "r{" in render_program(pa.with_bridges())


def test_later_comparison_is_ignored(corpus):
    # the clause is kept for the cell where X < 0 holds later, preserving the loop
    p = corpus("mutual")
    pa = first_round(p, Pred("p", 1))
    assert any(cl.head.pred.name == "p" and cl.body and len(cl.body) > 2 for cl in pa.clauses)
