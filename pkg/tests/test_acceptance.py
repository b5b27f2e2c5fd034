"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL ...`` line (shown even
under captured output) before asserting.  Run directly with
``python -m tests.test_acceptance`` for the summary lines alone.
"""
from __future__ import annotations

import random
import time

import numpy as np

from numloop import lincon
from numloop.acceptability import Solved, check_certificate, level_map_template
from numloop.adorn import collect_guards, guard_tuned_set, is_guard_tuned
from numloop.bruteforce import cond_mask, conj_mask, grid
from numloop.driver import UNKNOWN, adorned_with, first_round, infer
from numloop.lincon import Condition, LinIneq
from numloop.oracle import box_points, compare_semantics, point_query, validate_condition
from numloop.prep import integer_positions
from numloop.randprog import random_program
from numloop.syntax import Pred, Var, parse_condition

try:
    from .conftest import load
except ImportError:  # run as a script
    from conftest import load

C = parse_condition
NAMED = {"s1": "count_up", "1.3": "q_simple", "3.1": "oscillate", "4.1": "overlap", "4.2": "gcdlike",
         "5.1": "permuted"}


def _line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


def _emit(capsys, n, ok, detail):
    if capsys is None:
        print(_line(n, ok, detail))
        return
    with capsys.disabled():
        print("\n" + _line(n, ok, detail))


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


# --------------------------------------------------------------------------
# criteria


def criterion_1():
    r, dt = _timed(lambda: infer(load(NAMED["s1"])))
    ok = r.condition.is_true() and dt < 1.0
    return ok, f"condition {lincon.render(r.condition)}, {dt:.2f}s"


def criterion_2():
    r, dt = _timed(lambda: infer(load(NAMED["1.3"])))
    ok = lincon.equivalent(r.condition, C("$1 =< 0 \\/ $1 > 5")) and dt < 1.0
    return ok, f"condition {lincon.render(r.condition)}, {dt:.2f}s"


def _positive_gap_coefficient(rnd) -> bool:
    """Some solved system of the round gives the $1 > $2 primitive a positive coefficient."""
    gap = LinIneq.make({"$1": 1, "$2": -1}, -1)
    for system, out in rnd.attempts:
        if not isinstance(out, Solved):
            continue
        for o in system.obligations:
            for t in level_map_template(o.head).terms:
                if t.guard == gap and out.assignment.get(t.symbol, 0) > 0:
                    return True
    return False


def criterion_3():
    t = time.perf_counter()
    prog = load(NAMED["4.2"])
    r = infer(prog)
    a = lincon.entails(C("$1 =< $2 \\/ ($1 > $2 /\\ $2 > 0)"), r.condition)
    v = validate_condition(prog, Pred("q", 2), r.condition, [(-20, 20)] * 2, 100_000)
    c = r.iterations == 2 and _positive_gap_coefficient(r.rounds[1])
    dt = time.perf_counter() - t
    ok = a and v.ok and c and dt < 10.0
    return ok, (f"condition {lincon.render(r.condition)}; (a) {a}; (b) {v.checked} points, "
                f"{len(v.violations)} violations; (c) {r.iterations} rounds, gap coefficient "
                f"{_positive_gap_coefficient(r.rounds[-1])}; {dt:.2f}s")


def criterion_4():
    cells = guard_tuned_set([C("$1 > 5"), C("$1 > 10")])
    want = [C("$1 > 10"), C("$1 > 5 /\\ $1 =< 10"), C("$1 =< 5")]
    same = len(cells) == len(want) and all(any(lincon.equivalent(x, y) for y in want) for x in cells)
    prog = load(NAMED["4.1"])
    part = lincon.is_partition(cells)
    tuned = is_guard_tuned(cells, prog, integer_positions(prog), Pred("r", 1))
    return same and part and tuned, (f"cells {[lincon.render(x) for x in cells]}, partition {part}, "
                                     f"guard-tuned {tuned}")


def criterion_5():
    prog = load(NAMED["5.1"])
    P = Pred("p", 2)
    cells = first_round(prog, P).adornments[P]
    want = [C("$1 < 0 /\\ $2 < -1"), C("($1 < 0 /\\ $2 >= -1) \\/ $1 >= 0")]
    a = len(cells) == len(want) and all(any(lincon.equivalent(x, y) for y in want) for x in cells)
    r = infer(prog, P)
    b = lincon.entails(C("$1 >= 0 \\/ ($1 < 0 /\\ $2 >= -1)"), r.condition)
    v = validate_condition(prog, P, r.condition, [(-15, 15)] * 2, 100_000)
    ok = a and b and v.ok
    return ok, (f"(a) adornments {[lincon.render(x) for x in cells]}: {a}; (b) condition "
                f"{lincon.render(r.condition)} entailed: {b}, {v.checked} points, "
                f"{len(v.violations)} violations")


def _sweep(prog, adorned, q):
    pts = [point_query(q, pt) for pt in box_points([(-10, 10)] * q.arity)]
    return compare_semantics(prog, adorned.with_bridges(), pts, 10_000)


def criterion_6(n_random: int = 200, seed: int = 0):
    t = time.perf_counter()
    checked, bad = 0, []
    for name in sorted(set(NAMED.values())):
        prog = load(name)
        q = prog.analyze_targets()[0]
        variants = [first_round(prog, q)]
        for rnd in infer(prog, q).rounds[1:]:
            variants.append(adorned_with(prog, q, rnd.adornments))
        for pa in variants:
            rep = _sweep(prog, pa, q)
            checked += rep.checked
            bad += [(name, m) for m in rep.mismatches]
    rng = random.Random(seed)
    for i in range(n_random):
        prog = random_program(rng)
        q = prog.analyze_targets()[0]
        rep = _sweep(prog, first_round(prog, q), q)
        checked += rep.checked
        bad += [(f"random #{i}", m) for m in rep.mismatches]
    dt = time.perf_counter() - t
    ok = not bad and dt < 300
    first = f"; first: {bad[0][0]} {bad[0][1]}" if bad else ""
    return ok, f"{checked} queries, {len(bad)} mismatches, {dt:.1f}s{first}"


def criterion_7():
    prog = load(NAMED["3.1"])
    P = Pred("p", 1)
    pa = first_round(prog, P)
    heads = {}
    for cl, i in zip(pa.clauses, pa.provenance):
        if cl.head.pred.name == "p":
            heads.setdefault(i, set()).add(cl.head.adornment)
    want = {0: C("$1 > 1 /\\ $1 < 1000"), 1: C("$1 < -1 /\\ $1 > -1000")}
    h = (set(heads) == set(want) and all(len(heads[i]) == 1 and lincon.equivalent(next(iter(heads[i])), w)
                                         for i, w in want.items()))
    sem = _sweep(prog, pa, P)
    r = infer(prog, P)
    recursive = [st for st in r.adornments if any(lincon.equivalent(st.adornment, w) for w in want.values())]
    unknown = len(recursive) == 2 and all(st.status == UNKNOWN for st in recursive)
    ent = lincon.entails(r.condition, C("$1 =< -1000 \\/ ($1 >= -1 /\\ $1 =< 1) \\/ $1 >= 1000"))
    ok = h and sem.ok and unknown and ent
    return ok, (f"heads {h}; semantics {sem.checked} queries, {len(sem.mismatches)} mismatches; "
                f"recursive cells unknown {unknown}; condition {lincon.render(r.condition)} entailed {ent}")


def _rand_ineq(rng, k):
    while True:
        co = {f"${i}": rng.randint(-3, 3) for i in range(1, k + 1)}
        i = LinIneq.make(co, rng.randint(-12, 12))
        if i.coeffs:
            return i


def _rand_cond(rng, k, max_d=3, max_c=3):
    return Condition.from_disjuncts([[_rand_ineq(rng, k) for _ in range(rng.randint(1, max_c))]
                                     for _ in range(rng.randint(1, max_d))])


def criterion_8(cases: int = 1000, seed: int = 1):
    t = time.perf_counter()
    rng = random.Random(seed)
    names2, names3 = ["$1", "$2"], ["$1", "$2", "$3"]
    pts2, pts3 = grid(2, -20, 20), grid(3, -20, 20)
    fails = {"negation": 0, "projection": 0, "partition": 0, "primitive": 0}

    for _ in range(cases):
        c = _rand_cond(rng, 2)
        if np.any(cond_mask(c, names2, pts2) == cond_mask(lincon.negate(c), names2, pts2)):
            fails["negation"] += 1

    for _ in range(cases):
        c = _rand_cond(rng, 3, 2)
        keep = rng.sample(names3, rng.randint(1, 2))
        proj = lincon.project(c, keep)
        inside = cond_mask(c, names3, pts3)
        sub = pts3[inside][:, [names3.index(v) for v in keep]]
        if len(sub) and not np.all(cond_mask(proj, keep, sub)):
            fails["projection"] += 1

    for _ in range(cases):
        conds = [_rand_cond(rng, 2, 2, 2) for _ in range(rng.randint(1, 3))]
        cells = guard_tuned_set(conds)
        count = sum(cond_mask(x, names2, pts2).astype(int) for x in cells)
        tuned = True
        for x in cells:
            m = cond_mask(x, names2, pts2)
            for g in conds:
                gm = cond_mask(g, names2, pts2)
                if np.any(m & gm) and np.any(m & ~gm):
                    tuned = False
        if not np.all(count == 1) or not tuned:
            fails["partition"] += 1

    done = 0
    while done < cases:
        conj = [_rand_ineq(rng, 2) for _ in range(rng.randint(1, 3))]
        a = Condition.of(*conj)
        if not lincon.satisfiable(a) or not a.is_conjunction():
            continue
        done += 1
        inside = conj_mask(a.conjuncts(), names2, pts2)
        for prim in level_map_template(Pred("p", 2, a)).terms:
            co, k = prim.form((Var("$1"), Var("$2")))
            val = k + sum(cv * pts2[:, int(v[1:]) - 1] for v, cv in co.items())
            if np.any(val[inside] < 0):
                fails["primitive"] += 1
                break

    dt = time.perf_counter() - t
    ok = not any(fails.values()) and dt < 120
    return ok, f"{cases} cases per property, failures {fails}, {dt:.1f}s"


def criterion_9():
    solved = obligations = failures = 0
    for name in sorted(set(NAMED.values()) | {"mutual"}):
        for rnd in infer(load(name)).rounds:
            for system, out in rnd.attempts:
                if not isinstance(out, Solved):
                    continue
                solved += 1
                for o in system.obligations:
                    obligations += 1
                    failures += check_certificate(o, out.assignment, 50)
    return failures == 0 and solved > 0, (f"{solved} solved systems, {obligations} obligations, "
                                          f"{failures} counterexamples")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9]


def _check(capsys, n):
    ok, detail = CRITERIA[n - 1]()
    _emit(capsys, n, ok, detail)
    assert ok, detail


def test_criterion_1_count_up(capsys):
    _check(capsys, 1)


def test_criterion_2_bounded_loop(capsys):
    _check(capsys, 2)


def test_criterion_3_subtract_loop(capsys):
    _check(capsys, 3)


def test_criterion_4_overlapping_guards(capsys):
    _check(capsys, 4)


def test_criterion_5_extension(capsys):
    _check(capsys, 5)


def test_criterion_6_semantics_preserved(capsys):
    _check(capsys, 6)


def test_criterion_7_nonlinear(capsys):
    _check(capsys, 7)


def test_criterion_8_constraint_properties(capsys):
    _check(capsys, 8)


def test_criterion_9_certificates(capsys):
    _check(capsys, 9)


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        _emit(None, k, ok, detail)
