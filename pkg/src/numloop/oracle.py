"""Depth-first, leftmost LD-resolution with a step budget.

Used as ground truth: a query whose tree is exhausted within the budget
terminates; ``hit_bound`` means the budget ran out (infinite or just big).
Unification uses the occurs check.  Comparisons and ``is`` evaluate ground
integer expressions; a non-ground one fails the branch and is counted in
``errors``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import lincon
from .syntax import Call, Clause, Compare, Int, Pred, Program, Var


class _Ref:
    __slots__ = ("val",)

    def __init__(self):
        self.val = None


class _ArithError(Exception):
    pass


def _deref(t):
    while type(t) is _Ref:
        v = t.val
        if v is None:
            return t
        t = v
    return t


def _occurs(r, t) -> bool:
    t = _deref(t)
    if t is r:
        return True
    if type(t) is tuple:
        return any(_occurs(r, a) for a in t[1])
    return False


def _unify(a, b, trail) -> bool:
    a = _deref(a)
    b = _deref(b)
    if a is b:
        return True
    ta, tb = type(a), type(b)
    if ta is _Ref:
        if tb is not int and _occurs(a, b):
            return False
        a.val = b
        trail.append(a)
        return True
    if tb is _Ref:
        if ta is not int and _occurs(b, a):
            return False
        b.val = a
        trail.append(b)
        return True
    if ta is int:
        return tb is int and a == b
    if tb is int:
        return False
    if a[0] != b[0] or len(a[1]) != len(b[1]):
        return False
    return all(_unify(x, y, trail) for x, y in zip(a[1], b[1]))


def _eval(t) -> int:
    t = _deref(t)
    if type(t) is int:
        return t
    if type(t) is _Ref:
        raise _ArithError("instantiation error")
    f, args = t
    if len(args) == 2:
        x, y = _eval(args[0]), _eval(args[1])
        if f == "+":
            return x + y
        if f == "-":
            return x - y
        if f == "*":
            return x * y
        if f == "div":
            if y == 0:
                raise _ArithError("division by zero")
            return x // y
    elif len(args) == 1 and f == "-":
        return -_eval(args[0])
    raise _ArithError(f"not an arithmetic expression: {f}/{len(args)}")


_CMP = {
    "<": int.__lt__, ">": int.__gt__, "=<": int.__le__, ">=": int.__ge__,
}


# --------------------------------------------------------------------------
# compilation: terms become templates over a per-clause variable vector


def _template(t, index: dict):
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Var):
        if t.name not in index:
            index[t.name] = len(index)
        return ("$v", index[t.name])
    return (t.functor, tuple(_template(a, index) for a in t.args))


def _build(tpl, env):
    if type(tpl) is int:
        return tpl
    if tpl[0] == "$v":
        return env[tpl[1]]
    return (tpl[0], tuple(_build(a, env) for a in tpl[1]))


def _key(c: Call):
    return (c.name, len(c.args), c.adornment)


class _Compiled:
    __slots__ = ("nvars", "head", "body")

    def __init__(self, clause: Clause):
        index: dict = {}
        self.head = tuple(_template(a, index) for a in clause.head.args)
        body = []
        for lit in clause.body:
            if isinstance(lit, Call):
                body.append((0, _key(lit), tuple(_template(a, index) for a in lit.args)))
            elif isinstance(lit, Compare):
                body.append((1, _CMP[lit.op], (_template(lit.lhs, index), _template(lit.rhs, index))))
            else:
                body.append((2, None, (_template(lit.target, index), _template(lit.expr, index))))
        self.nvars = len(index)
        self.body = tuple(body)


class Database:
    """A program compiled for the general engine and, when every head and call
    argument is a variable or an integer, for the ground fast path as well."""

    def __init__(self, prog: Program):
        self.general: dict = {}
        for c in prog.clauses:
            self.general.setdefault(_key(c.head), []).append(_Compiled(c))
        try:
            fast: dict = {}
            for c in prog.clauses:
                fast.setdefault(_key(c.head), []).append(_fast_clause(c))
            self.fast = fast
        except _NotFlat:
            self.fast = None


def compile_program(prog: Program) -> Database:
    return Database(prog)


# --------------------------------------------------------------------------
# ground fast path: environments are lists of ints, expressions are compiled
# to Python lambdas.  Same clause order, same step accounting.


class _NotFlat(Exception):
    pass


class _Fallback(Exception):
    pass


def _py_expr(t, index: dict) -> str:
    if isinstance(t, Int):
        return f"({t.value})"
    if isinstance(t, Var):
        if t.name not in index:
            index[t.name] = len(index)
        return f"e[{index[t.name]}]"
    if len(t.args) == 1 and t.functor == "-":
        return f"(-{_py_expr(t.args[0], index)})"
    if len(t.args) == 2 and t.functor in ("+", "-", "*", "div"):
        op = "//" if t.functor == "div" else t.functor
        return f"({_py_expr(t.args[0], index)} {op} {_py_expr(t.args[1], index)})"
    raise _NotFlat


_PY_CMP = {"<": "<", ">": ">", "=<": "<=", ">=": ">="}


def _slot(t, index: dict):
    if isinstance(t, Int):
        return (0, t.value)
    if isinstance(t, Var):
        if t.name not in index:
            index[t.name] = len(index)
            return (1, index[t.name])
        return (2, index[t.name])
    raise _NotFlat


def _fast_clause(c: Clause):
    index: dict = {}
    head = tuple(_slot(a, index) for a in c.head.args)
    body = []
    for lit in c.body:
        if isinstance(lit, Call):
            args = []
            for a in lit.args:
                k, v = _slot(a, index)
                args.append((k == 0, v))
            body.append((0, _key(lit), tuple(args)))
        elif isinstance(lit, Compare):
            src = f"lambda e: {_py_expr(lit.lhs, index)} {_PY_CMP[lit.op]} {_py_expr(lit.rhs, index)}"
            body.append((1, eval(src), None))
        else:
            fn = eval(f"lambda e: {_py_expr(lit.expr, index)}")
            k, v = _slot(lit.target, index) if isinstance(lit.target, (Var, Int)) else (None, None)
            if k is None:
                raise _NotFlat
            body.append((2, fn, (k == 0, v)))
    return len(index), head, tuple(body)


def _fast_solve(fdb: dict, key, args: tuple, step_bound: int, loop_check: bool) -> SolveResult:
    steps = 0
    answers = 0
    errors: list = []
    trail: list = []
    cps: list = []
    seen: dict = {}
    cont = None  # (body, pos, env, parent); a finished body is never kept on the chain
    clauses, i = None, 0
    state = 0  # 0 select call, 1 resolve from clause i, 2 run bodies, 3 backtrack

    while True:
        if state == 0:
            if loop_check:
                lk = (key, args, id(cont))
                prev = seen.get(lk)
                h = len(cps)
                if prev is not None and prev[0] <= h and (prev[0] == 0 or cps[prev[0] - 1] is prev[1]):
                    return SolveResult([()] * answers, True, steps, errors, loop_detected=True)
                seen[lk] = (h, cps[-1] if cps else None, cont)
            clauses = fdb.get(key)
            i = 0
            state = 1 if clauses else 3
        elif state == 1:
            n = len(clauses)
            state = 3
            while i < n:
                steps += 1
                if steps > step_bound:
                    return SolveResult([()] * answers, True, step_bound, errors)
                nv, head, body = clauses[i]
                e = [None] * nv
                ok = True
                for (kind, v), x in zip(head, args):
                    if kind == 1:
                        e[v] = x
                    elif (v if kind == 0 else e[v]) != x:
                        ok = False
                        break
                i += 1
                if ok:
                    if i < n:
                        cps.append((key, args, cont, clauses, i, len(trail)))
                    if body:
                        cont = (body, 0, e, cont)
                    state = 2
                    break
        elif state == 3:
            if not cps:
                return SolveResult([()] * answers, False, steps, errors)
            key, args, cont, clauses, i, mark = cps.pop()
            while len(trail) > mark:
                te, ti = trail.pop()
                te[ti] = None
            state = 1
        else:
            if cont is None:
                answers += 1
                state = 3
                continue
            body, pos, e, parent = cont
            kind, f, extra = body[pos]
            nxt = (body, pos + 1, e, parent) if pos + 1 < len(body) else parent
            if kind == 0:
                vals = []
                for is_const, v in extra:
                    x = v if is_const else e[v]
                    if x is None:
                        raise _Fallback
                    vals.append(x)
                key, args, cont = f, tuple(vals), nxt
                state = 0
                continue
            steps += 1
            if steps > step_bound:
                return SolveResult([()] * answers, True, step_bound, errors)
            try:
                if kind == 1:
                    ok = f(e)
                else:
                    val = f(e)
                    if type(val) is not int:
                        raise TypeError
                    is_const, v = extra
                    if is_const:
                        ok = val == v
                    elif e[v] is None:
                        e[v] = val
                        trail.append((e, v))
                        ok = True
                    else:
                        ok = e[v] == val
            except TypeError:
                errors.append("instantiation error")
                ok = False
            except ZeroDivisionError:
                errors.append("division by zero")
                ok = False
            if ok:
                cont = nxt
            else:
                state = 3


class _Unknown(Exception):
    pass


def _ground_outcome(fdb: dict, key, args: tuple, memo: dict, active: set, limits: list):
    """``(succeeds, finite)`` of the LD-tree of a ground call, computed exactly.

    In the flat fragment every call is ground when selected, so the subtree of
    a call depends on the call alone and can be shared.  A call that reappears
    on its own ancestor path has an infinite tree.  ``limits`` holds the
    remaining distinct-call and depth allowances; running out raises _Unknown.
    """
    k = (key, args)
    got = memo.get(k)
    if got is not None:
        return got
    if k in active:
        return (False, False)
    limits[0] -= 1
    if limits[0] < 0 or len(active) >= limits[1]:
        raise _Unknown
    active.add(k)
    succ, fin = False, True
    for nv, head, body in fdb.get(key, ()):
        e = [None] * nv
        ok = True
        for (kind, v), x in zip(head, args):
            if kind == 1:
                e[v] = x
            elif (v if kind == 0 else e[v]) != x:
                ok = False
                break
        if not ok:
            continue
        s, f = _body_outcome(fdb, body, 0, e, memo, active, limits)
        succ = succ or s
        fin = fin and f
    active.discard(k)
    memo[k] = (succ, fin)
    return succ, fin


def _body_outcome(fdb, body, pos, e, memo, active, limits):
    while pos < len(body):
        kind, f, extra = body[pos]
        pos += 1
        if kind == 0:
            vals = []
            for is_const, v in extra:
                x = v if is_const else e[v]
                if x is None:
                    raise _Unknown
                vals.append(x)
            s, fin = _ground_outcome(fdb, f, tuple(vals), memo, active, limits)
            if not fin:
                return False, False
            if not s:
                return False, True
            continue
        try:
            if kind == 1:
                ok = f(e)
            else:
                val = f(e)
                if type(val) is not int:
                    return False, True
                is_const, v = extra
                if is_const:
                    ok = val == v
                elif e[v] is None:
                    e = list(e)
                    e[v] = val
                    ok = True
                else:
                    ok = e[v] == val
        except (TypeError, ZeroDivisionError):
            ok = False
        if not ok:
            return False, True
    return True, True


def ground_outcome(db, query: Call, max_calls: int = 200_000, max_depth: int = 2_000):
    """Exact ``(succeeds, finite)`` for a ground query on a flat integer program.

    Returns None when the program is outside the flat fragment, when a call is
    selected with an unbound argument, or when the allowances run out.
    """
    import sys

    db = db if isinstance(db, Database) else compile_program(db)
    if db.fast is None or not all(isinstance(a, Int) for a in query.args):
        return None
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 4 * max_depth + 200))
    try:
        return _ground_outcome(db.fast, _key(query), tuple(a.value for a in query.args), {}, set(),
                               [max_calls, max_depth])
    except _Unknown:
        return None
    finally:
        sys.setrecursionlimit(old)


# --------------------------------------------------------------------------
# answers


def _resolve(t, names: dict):
    t = _deref(t)
    if type(t) is int:
        return str(t)
    if type(t) is _Ref:
        if id(t) not in names:
            names[id(t)] = f"_G{len(names)}"
        return names[id(t)]
    return f"{t[0]}({','.join(_resolve(a, names) for a in t[1])})"


def _ground_key(goals):
    out = []
    while goals is not None:
        lit, goals = goals
        kind, k, args = lit
        out.append((kind, k if kind == 0 else id(k), tuple(_ground(a) for a in args)))
    return tuple(out)


class _NotGround(Exception):
    pass


def _ground(t):
    t = _deref(t)
    if type(t) is int:
        return t
    if type(t) is _Ref:
        raise _NotGround
    return (t[0], tuple(_ground(a) for a in t[1]))


@dataclass
class SolveResult:
    answers: list  # each a tuple of rendered bindings for the query variables
    hit_bound: bool
    steps: int
    errors: list = field(default_factory=list)
    loop_detected: bool = False

    def answer_set(self) -> frozenset:
        return frozenset(self.answers)


def ld_solve(prog, query, step_bound: int = 10_000, loop_check: bool = False) -> SolveResult:
    """Run ``query`` (a Call or list of Calls) against ``prog``.

    With ``loop_check`` an exact repetition of a ground goal list on the
    current derivation path ends the run with ``hit_bound`` set, which is what
    the budgeted run would report as well.
    """
    if step_bound < 1:
        raise ValueError("step_bound must be positive")
    db = prog if isinstance(prog, Database) else compile_program(prog)
    calls = [query] if isinstance(query, Call) else list(query)
    if db.fast is not None and len(calls) == 1 and all(isinstance(a, Int) for a in calls[0].args):
        try:
            return _fast_solve(db.fast, _key(calls[0]), tuple(a.value for a in calls[0].args),
                               step_bound, loop_check)
        except _Fallback:
            pass
    db = db.general

    qindex: dict = {}
    qlits = [(0, _key(c), tuple(_template(a, qindex) for a in c.args)) for c in calls]
    env = [_Ref() for _ in range(len(qindex))]
    qnames = sorted(qindex, key=qindex.get)
    goals = None
    for kind, k, args in reversed(qlits):
        goals = ((kind, k, tuple(_build(a, env) for a in args)), goals)

    trail: list = []
    cps: list = []  # [goals_after_call, call_args, clauses, next_index, trail_len]
    answers: list = []
    errors: list = []
    steps = 0
    seen: dict = {}

    def answer():
        names: dict = {}
        return tuple(f"{n}={_resolve(r, names)}" for n, r in zip(qnames, env))

    def undo(n):
        while len(trail) > n:
            trail.pop().val = None

    def try_clauses(rest, args, clauses, i):
        """Resolve with the first unifying clause from index i; new goals or _FAIL."""
        nonlocal steps
        n = len(clauses)
        while i < n:
            steps += 1
            if steps > step_bound:
                raise _Budget
            cl = clauses[i]
            mark = len(trail)
            fresh = [_Ref() for _ in range(cl.nvars)]
            ok = True
            for h, a in zip(cl.head, args):
                if not _unify(_build(h, fresh), a, trail):
                    ok = False
                    break
            if ok:
                if i + 1 < n:
                    cps.append((rest, args, clauses, i + 1, mark))
                g = rest
                for kind, k, targs in reversed(cl.body):
                    g = ((kind, k, tuple(_build(t, fresh) for t in targs)), g)
                return g
            undo(mark)
            i += 1
        return _FAIL

    def backtrack():
        while cps:
            rest, args, clauses, i, mark = cps.pop()
            undo(mark)
            g = try_clauses(rest, args, clauses, i)
            if g is not _FAIL:
                return g
        return _DONE

    try:
        while True:
            if goals is _DONE:
                return SolveResult(answers, False, steps, errors)
            if goals is None:
                answers.append(answer())
                goals = backtrack()
                continue
            lit, rest = goals
            kind, k, args = lit
            if kind == 0:
                if loop_check:
                    try:
                        key = _ground_key(goals)
                    except _NotGround:
                        key = None
                    if key is not None:
                        top = cps[-1] if cps else None
                        prev = seen.get(key)
                        if prev is not None and prev[0] <= len(cps) and (
                                prev[0] == 0 or cps[prev[0] - 1] is prev[1]):
                            return SolveResult(answers, True, steps, errors, loop_detected=True)
                        seen[key] = (len(cps), top)
                clauses = db.get(k)
                g = try_clauses(rest, args, clauses, 0) if clauses else _FAIL
                goals = g if g is not _FAIL else backtrack()
                continue
            steps += 1
            if steps > step_bound:
                raise _Budget
            try:
                if kind == 1:
                    ok = k(_eval(args[0]), _eval(args[1]))
                else:
                    ok = _unify(args[0], _eval(args[1]), trail)
            except _ArithError as e:
                errors.append(str(e))
                ok = False
            goals = rest if ok else backtrack()
    except _Budget:
        return SolveResult(answers, True, step_bound, errors)
    except RecursionError:
        return SolveResult(answers, True, steps, errors + ["term depth exceeded"])


class _Budget(Exception):
    pass


_DONE = object()
_FAIL = object()


# --------------------------------------------------------------------------
# sweeps


def box_points(box):
    """All integer tuples of a box given as ``[(lo, hi), ...]`` (inclusive)."""
    return itertools.product(*(range(lo, hi + 1) for lo, hi in box))


def point_query(pred: Pred, point) -> Call:
    return Call(pred.name, tuple(Int(v) for v in point), pred.adornment)


def box_query(pred: Pred, point, positions) -> Call:
    """Query with integers at ``positions`` and fresh variables elsewhere."""
    it = iter(point)
    args = []
    for i in range(1, pred.arity + 1):
        args.append(Int(next(it)) if i in positions else Var(f"A{i}"))
    return Call(pred.name, tuple(args))


@dataclass
class Mismatch:
    query: Call
    left: SolveResult
    right: SolveResult

    def __str__(self):
        from .syntax import render_literal

        return (f"{render_literal(self.query)}: hit_bound {self.left.hit_bound} vs {self.right.hit_bound}, "
                f"{len(self.left.answers)} vs {len(self.right.answers)} answers")


@dataclass
class SemanticsReport:
    checked: int
    mismatches: list

    @property
    def ok(self) -> bool:
        return not self.mismatches


def compare_semantics(p: Program, p_ag: Program, queries, bound: int = 10_000,
                      escalate: int = 100, loop_check: bool = True) -> SemanticsReport:
    """Compare answer sets and termination of each query under two programs.

    Answers are compared as sets, and only when both runs exhaust their tree.
    When exactly one run hits the budget the adorned program may simply need
    more steps for an equally finite tree (splitting a clause repeats the
    failed prefix of its body).  Ground queries on flat programs are then
    settled exactly with ``ground_outcome``; otherwise the bounded run is
    repeated with ``escalate`` times the budget before a mismatch is reported.
    """
    db1, db2 = compile_program(p), compile_program(p_ag)
    mismatches = []
    n = 0
    for q in queries:
        n += 1
        r1 = ld_solve(db1, q, bound, loop_check)
        r2 = ld_solve(db2, q, bound, loop_check)
        if r1.hit_bound != r2.hit_bound:
            g1, g2 = ground_outcome(db1, q), ground_outcome(db2, q)
            if g1 is not None and g2 is not None:
                if g1[1] != g2[1] or (g1[1] and g1[0] != g2[0]):
                    mismatches.append(Mismatch(q, r1, r2))
                continue
        if r1.hit_bound != r2.hit_bound and escalate > 1:
            if r1.hit_bound:
                r1 = ld_solve(db1, q, bound * escalate, loop_check)
            else:
                r2 = ld_solve(db2, q, bound * escalate, loop_check)
        if r1.hit_bound != r2.hit_bound:
            mismatches.append(Mismatch(q, r1, r2))
        elif not r1.hit_bound and r1.answer_set() != r2.answer_set():
            mismatches.append(Mismatch(q, r1, r2))
    return SemanticsReport(n, mismatches)


@dataclass
class ValidationReport:
    checked: int
    violations: list  # points where the condition holds but the query hit the bound

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_condition(prog: Program, pred: Pred, cond: lincon.Condition, box, bound: int = 100_000,
                       positions=None, loop_check: bool = True) -> ValidationReport:
    """Every point of ``box`` satisfying ``cond`` must exhaust within ``bound`` steps.

    ``box`` ranges over the integer positions (all positions by default).
    """
    positions = sorted(positions) if positions is not None else list(range(1, pred.arity + 1))
    db = compile_program(prog)
    checked, bad = 0, []
    for pt in box_points(box):
        env = {f"${i}": v for i, v in zip(positions, pt)}
        if not cond.holds(env):
            continue
        checked += 1
        r = ld_solve(db, box_query(pred, pt, positions), bound, loop_check)
        if r.hit_bound:
            bad.append(pt)
    return ValidationReport(checked, bad)
