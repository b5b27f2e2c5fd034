"""Exact linear integer constraints in disjunctive normal form.

An inequality ``LinIneq`` reads ``sum(coeff * var) + const >= 0`` with integer
data.  Variables are plain strings: ``"$i"`` names the i-th argument position
of a predicate, anything else is a clause variable.  Strict comparisons are
turned into non-strict ones using integrality, so negation is exact:
``not (e >= 0)`` is ``-e - 1 >= 0``.

Satisfiability is decided by Fourier-Motzkin elimination over the rationals.
An "unsat" answer is therefore sound for the integers; "sat" is conservative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Optional

from .syntax import Compound, Int, Term, Var

FM_CAP = 10_000


class NonlinearAtom(ValueError):
    def __init__(self, subtree):
        super().__init__(f"nonlinear expression: {subtree}")
        self.subtree = subtree


class CapacityError(RuntimeError):
    pass


def var_order(key: str):
    if key.startswith("$"):
        return (0, int(key[1:]), "")
    return (1, 0, key)


# --------------------------------------------------------------------------
# linear forms


def linear_form(t: Term) -> tuple:
    """Return ``(coeffs, const)`` for a linear arithmetic term."""
    if isinstance(t, Int):
        return {}, t.value
    if isinstance(t, Var):
        return {t.name: 1}, 0
    if isinstance(t, Compound):
        if t.functor == "-" and len(t.args) == 1:
            c, k = linear_form(t.args[0])
            return {v: -a for v, a in c.items()}, -k
        if len(t.args) == 2 and t.functor in ("+", "-"):
            c1, k1 = linear_form(t.args[0])
            c2, k2 = linear_form(t.args[1])
            s = 1 if t.functor == "+" else -1
            out = dict(c1)
            for v, a in c2.items():
                out[v] = out.get(v, 0) + s * a
            return out, k1 + s * k2
        if len(t.args) == 2 and t.functor == "*":
            c1, k1 = linear_form(t.args[0])
            c2, k2 = linear_form(t.args[1])
            if c1 and c2:
                raise NonlinearAtom(t)
            if c1:
                return {v: a * k2 for v, a in c1.items()}, k1 * k2
            return {v: a * k1 for v, a in c2.items()}, k1 * k2
    raise NonlinearAtom(t)


@dataclass(frozen=True, order=True)
class LinIneq:
    """``sum(c * v for v, c in coeffs) + const >= 0`` in canonical form."""

    coeffs: tuple  # ((var, coeff), ...) sorted by var_order, no zeros
    const: int

    @staticmethod
    def make(coeffs: Mapping, const: int) -> "LinIneq":
        items = sorted(((v, a) for v, a in coeffs.items() if a), key=lambda p: var_order(p[0]))
        if not items:
            return TRIVIAL if const >= 0 else CONTRADICTION
        g = reduce(math.gcd, (abs(a) for _, a in items), abs(const))
        if g > 1:
            items = [(v, a // g) for v, a in items]
            const //= g
        return LinIneq(tuple(items), const)

    @property
    def is_trivial(self) -> bool:
        return not self.coeffs and self.const >= 0

    @property
    def is_contradiction(self) -> bool:
        return not self.coeffs and self.const < 0

    def coeff(self, v: str) -> int:
        for k, a in self.coeffs:
            if k == v:
                return a
        return 0

    def variables(self) -> set:
        return {v for v, _ in self.coeffs}

    def negated(self) -> "LinIneq":
        return LinIneq.make({v: -a for v, a in self.coeffs}, -self.const - 1)

    def evaluate(self, point: Mapping) -> int:
        return sum(a * point[v] for v, a in self.coeffs) + self.const

    def holds(self, point: Mapping) -> bool:
        return self.evaluate(point) >= 0

    def substitute(self, mapping: Mapping) -> "LinIneq":
        """Replace variables by linear forms ``(coeffs, const)``."""
        out: dict = {}
        const = self.const
        for v, a in self.coeffs:
            if v in mapping:
                c, k = mapping[v]
                for w, b in c.items():
                    out[w] = out.get(w, 0) + a * b
                const += a * k
            else:
                out[v] = out.get(v, 0) + a
        return LinIneq.make(out, const)

    def __str__(self):
        return render_ineq(self)


TRIVIAL = LinIneq((), 0)
CONTRADICTION = LinIneq((), -1)


def normalize(op: str, lhs: Term, rhs: Term) -> LinIneq:
    """Integer-normalise ``lhs op rhs`` into a single ``>= 0`` inequality."""
    c1, k1 = linear_form(lhs)
    c2, k2 = linear_form(rhs)
    diff = dict(c1)
    for v, a in c2.items():
        diff[v] = diff.get(v, 0) - a
    k = k1 - k2
    if op == ">=":
        return LinIneq.make(diff, k)
    if op == ">":
        return LinIneq.make(diff, k - 1)
    neg = {v: -a for v, a in diff.items()}
    if op == "=<":
        return LinIneq.make(neg, -k)
    if op == "<":
        return LinIneq.make(neg, -k - 1)
    raise ValueError(f"unknown comparison {op!r}")


def equality(coeffs: Mapping, const: int) -> list:
    """``sum + const == 0`` as two inequalities."""
    return [LinIneq.make(coeffs, const), LinIneq.make({v: -a for v, a in coeffs.items()}, -const)]


# --------------------------------------------------------------------------
# Fourier-Motzkin


def _combine(p: LinIneq, n: LinIneq, v: str) -> LinIneq:
    a, b = p.coeff(v), -n.coeff(v)
    out: dict = {}
    for k, c in p.coeffs:
        out[k] = out.get(k, 0) + b * c
    for k, c in n.coeffs:
        out[k] = out.get(k, 0) + a * c
    out.pop(v, None)
    return LinIneq.make(out, b * p.const + a * n.const)


def _tighten(rows: Iterable[LinIneq]) -> Optional[dict]:
    """Keep the tightest constant per coefficient vector; None if contradictory."""
    best: dict = {}
    for r in rows:
        if r.is_trivial:
            continue
        if r.is_contradiction:
            return None
        c = best.get(r.coeffs)
        if c is None or r.const < c:
            best[r.coeffs] = r.const
    # opposite rows e >= 0 and -e + k >= 0 with const sum < 0 are inconsistent
    for coeffs, const in best.items():
        neg = tuple((v, -a) for v, a in coeffs)
        if neg in best and const + best[neg] < 0:
            return None
    return best


def _eliminate_rows(best: dict, v: str) -> list:
    rows = [LinIneq(c, k) for c, k in best.items()]
    with_v = [r for r in rows if r.coeff(v)]
    rest = [r for r in rows if not r.coeff(v)]
    # an equality through v lets us substitute instead of pairing
    for r in with_v:
        neg = tuple((w, -a) for w, a in r.coeffs)
        if best.get(neg) == -r.const:
            e = r if r.coeff(v) > 0 else LinIneq(neg, -r.const)
            ae = e.coeff(v)
            out = list(rest)
            for s in with_v:
                if s.coeffs in (r.coeffs, neg):
                    continue
                a = s.coeff(v)
                coeffs: dict = {}
                for w, c in s.coeffs:
                    coeffs[w] = coeffs.get(w, 0) + ae * c
                for w, c in e.coeffs:
                    coeffs[w] = coeffs.get(w, 0) - a * c
                coeffs.pop(v, None)
                out.append(LinIneq.make(coeffs, ae * s.const - a * e.const))
            return out
    pos = [r for r in with_v if r.coeff(v) > 0]
    neg_rows = [r for r in with_v if r.coeff(v) < 0]
    if len(rest) + len(pos) * len(neg_rows) > FM_CAP:
        raise CapacityError(f"Fourier-Motzkin blowup eliminating {v}")
    return rest + [_combine(p, n, v) for p in pos for n in neg_rows]


def fm_project(ineqs: Iterable[LinIneq], drop: Iterable[str]) -> Optional[list]:
    """Project onto the variables not in ``drop``; None means infeasible."""
    best = _tighten(ineqs)
    if best is None:
        return None
    todo = set(drop)
    while True:
        present = {v for c in best for v, _ in c} & todo
        if not present:
            break

        def cost(v):
            p = sum(1 for c in best if dict(c).get(v, 0) > 0)
            n = sum(1 for c in best if dict(c).get(v, 0) < 0)
            return (p * n - p - n, var_order(v))

        v = min(present, key=cost)
        best = _tighten(_eliminate_rows(best, v))
        if best is None:
            return None
        todo.discard(v)
    return [LinIneq(c, k) for c, k in best.items()]


def conj_satisfiable(ineqs: Iterable[LinIneq]) -> bool:
    ineqs = list(ineqs)
    try:
        rows = fm_project(ineqs, {v for r in ineqs for v in r.variables()})
    except CapacityError:
        return True
    return rows is not None


# --------------------------------------------------------------------------
# conditions


def make_conj(ineqs: Iterable[LinIneq]) -> Optional[frozenset]:
    out = set()
    for i in ineqs:
        if i.is_contradiction:
            return None
        if not i.is_trivial:
            out.add(i)
    return frozenset(out)


@dataclass(frozen=True)
class Condition:
    """A disjunction of conjunctions of ``LinIneq``."""

    disjuncts: frozenset  # of frozenset of LinIneq

    @staticmethod
    def of(*ineqs: LinIneq) -> "Condition":
        c = make_conj(ineqs)
        return FALSE if c is None else Condition(frozenset([c]))

    @staticmethod
    def from_disjuncts(ds: Iterable[Iterable[LinIneq]]) -> "Condition":
        out = set()
        for d in ds:
            c = make_conj(d)
            if c is not None:
                out.add(c)
        return Condition(frozenset(out))

    def variables(self) -> set:
        return {v for d in self.disjuncts for i in d for v in i.variables()}

    def is_true(self) -> bool:
        return frozenset() in self.disjuncts

    def is_false(self) -> bool:
        return not self.disjuncts

    def is_conjunction(self) -> bool:
        return len(self.disjuncts) == 1

    def conjuncts(self) -> list:
        """Inequalities of a single-disjunct condition, in canonical order."""
        if len(self.disjuncts) != 1:
            raise ValueError("not a conjunction")
        return sorted(next(iter(self.disjuncts)), key=render_ineq_key)

    def holds(self, point: Mapping) -> bool:
        return any(all(i.holds(point) for i in d) for d in self.disjuncts)

    def substitute(self, mapping: Mapping) -> "Condition":
        return Condition.from_disjuncts([i.substitute(mapping) for i in d] for d in self.disjuncts)

    def rename(self, mapping: Mapping) -> "Condition":
        return self.substitute({k: ({v: 1}, 0) for k, v in mapping.items()})

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"Condition({render(self)!r})"


TRUE = Condition(frozenset([frozenset()]))
FALSE = Condition(frozenset())


def conjoin(a: Condition, b: Condition) -> Condition:
    out = set()
    for d1 in a.disjuncts:
        for d2 in b.disjuncts:
            d = d1 | d2
            if conj_satisfiable(d):
                out.add(d)
    return Condition(frozenset(out))


def conjoin_all(conds: Iterable[Condition]) -> Condition:
    return reduce(conjoin, conds, TRUE)


def disjoin(a: Condition, b: Condition) -> Condition:
    return Condition(a.disjuncts | b.disjuncts)


def _negate_raw(c: Condition) -> list:
    partial = [frozenset()]
    for d in sorted(c.disjuncts, key=len):
        if not d:
            return []
        nxt = set()
        for p in partial:
            for i in d:
                q = p | {i.negated()}
                if conj_satisfiable(q):
                    nxt.add(q)
        # drop supersets of other partial conjunctions
        partial = [p for p in nxt if not any(o < p for o in nxt)]
        if not partial:
            return []
    return partial


def negate(c: Condition) -> Condition:
    return simplify(Condition.from_disjuncts(_negate_raw(c)))


def satisfiable(c) -> bool:
    if isinstance(c, Condition):
        return any(conj_satisfiable(d) for d in c.disjuncts)
    return conj_satisfiable(c)


def _all_branches_unsat(conj: frozenset, rest: list) -> bool:
    if not conj_satisfiable(conj):
        return True
    if not rest:
        return False
    return all(_all_branches_unsat(conj | {i.negated()}, rest[1:]) for i in rest[0])


def conj_entails(conj: Iterable[LinIneq], b: Condition) -> bool:
    """Does the conjunction entail condition ``b`` (sound, rational test)?"""
    return _all_branches_unsat(frozenset(conj), sorted(b.disjuncts, key=len))


def conj_entails_ineq(conj: Iterable[LinIneq], i: LinIneq) -> bool:
    return not conj_satisfiable(set(conj) | {i.negated()})


def entails(a: Condition, b: Condition) -> bool:
    """True means every model of ``a`` is a model of ``b``; False means unknown."""
    return all(conj_entails(d, b) for d in a.disjuncts)


def equivalent(a: Condition, b: Condition) -> bool:
    return entails(a, b) and entails(b, a)


def eliminate(conj: Iterable[LinIneq], drop: Iterable[str]) -> frozenset:
    """Fourier-Motzkin projection of a conjunction; contradiction if infeasible."""
    rows = fm_project(conj, drop)
    if rows is None:
        return frozenset([CONTRADICTION])
    return _reduce_conj(frozenset(rows))


def project(c: Condition, keep: Iterable[str]) -> Condition:
    keep = set(keep)
    out = []
    for d in c.disjuncts:
        drop = {v for i in d for v in i.variables()} - keep
        out.append(eliminate(d, drop))
    return simplify(Condition.from_disjuncts(out))


def _reduce_conj(d: frozenset) -> frozenset:
    """Drop inequalities entailed by the others."""
    keep = sorted(d, key=render_ineq_key)
    i = len(keep) - 1
    while i >= 0:
        others = keep[:i] + keep[i + 1:]
        if conj_entails_ineq(others, keep[i]):
            keep = others
        i -= 1
    return frozenset(keep)


def _conj_entails_conj(a: frozenset, b: frozenset) -> bool:
    return all(conj_entails_ineq(a, i) for i in b)


def _try_merge(d1: frozenset, d2: frozenset) -> Optional[frozenset]:
    cand = {i for i in d1 if conj_entails_ineq(d2, i)} | {j for j in d2 if conj_entails_ineq(d1, j)}
    cand = frozenset(cand)
    # cand contains d1 and d2; it is a merge iff it adds no other point
    for i in d1:
        for j in d2:
            if conj_satisfiable(cand | {i.negated(), j.negated()}):
                return None
    return _reduce_conj(cand)


NEGATION_LIMIT = 4096


def simplify(c: Condition) -> Condition:
    """Remove unsat disjuncts, redundant inequalities and absorbed disjuncts.

    Pairs of disjuncts whose union is a single conjunction are merged, and a
    condition whose negation is unsatisfiable becomes ``TRUE``.
    """
    ds = [_reduce_conj(d) for d in c.disjuncts if conj_satisfiable(d)]
    if any(not d for d in ds):
        return TRUE
    changed = True
    while changed:
        changed = False
        ds = sorted(set(ds), key=render_conj)
        # absorption
        kept: list = []
        for idx, d in enumerate(ds):
            absorbed = False
            for jdx, e in enumerate(ds):
                if idx == jdx or not _conj_entails_conj(d, e):
                    continue
                # equivalent pairs keep the first in order
                if _conj_entails_conj(e, d) and jdx > idx:
                    continue
                absorbed = True
                break
            if not absorbed:
                kept.append(d)
        if len(kept) != len(ds):
            ds, changed = kept, True
            continue
        for a in range(len(ds)):
            for b in range(a + 1, len(ds)):
                m = _try_merge(ds[a], ds[b])
                if m is not None:
                    ds = [d for k, d in enumerate(ds) if k not in (a, b)] + [m]
                    changed = True
                    break
            if changed:
                break
        if any(not d for d in ds):
            return TRUE
    if len(ds) > 1 and math.prod(len(d) for d in ds) <= NEGATION_LIMIT:
        if not _negate_raw(Condition(frozenset(ds))):
            return TRUE
    return Condition(frozenset(ds))


def instantiate(c: Condition, args: Iterable[Term]) -> Condition:
    """Replace ``$i`` by the i-th argument term (a linear expression)."""
    args = list(args)
    needed = {int(v[1:]) for v in c.variables() if v.startswith("$")}
    mapping = {}
    for i in needed:
        if i > len(args):
            raise ValueError(f"${i} out of range for {len(args)} arguments")
        mapping[f"${i}"] = linear_form(args[i - 1])
    return c.substitute(mapping)


def is_partition(conds: Iterable[Condition]) -> bool:
    conds = list(conds)
    for i in range(len(conds)):
        for j in range(i + 1, len(conds)):
            if satisfiable(conjoin(conds[i], conds[j])):
                return False
    union = reduce(disjoin, conds, FALSE)
    return not _negate_raw(union) if union.disjuncts else False


# --------------------------------------------------------------------------
# rendering


def _fmt_sum(terms: list, const: int) -> str:
    parts = []
    for v, a in terms:
        s = v if a == 1 else f"{a}*{v}"
        parts.append(s)
    out = " + ".join(parts)
    if const and out:
        out += f" + {const}" if const > 0 else f" - {-const}"
    elif not out:
        out = str(const)
    return out


def render_ineq(i: LinIneq, pretty_strict: bool = False) -> str:
    if not i.coeffs:
        return "true" if i.const >= 0 else "false"
    first = i.coeffs[0][1]
    pos = [(v, a) for v, a in i.coeffs if a > 0]
    neg = [(v, -a) for v, a in i.coeffs if a < 0]
    if first > 0:
        rhs_const = -i.const
        if pretty_strict:
            return f"{_fmt_sum(pos, 0)} > {_fmt_sum(neg, rhs_const - 1)}"
        return f"{_fmt_sum(pos, 0)} >= {_fmt_sum(neg, rhs_const)}"
    return f"{_fmt_sum(neg, 0)} =< {_fmt_sum(pos, i.const)}"


def render_ineq_key(i: LinIneq):
    return ([var_order(v) for v, _ in i.coeffs], render_ineq(i))


def render_conj(d: Iterable[LinIneq], pretty_strict: bool = False) -> str:
    items = sorted(d, key=render_ineq_key)
    if not items:
        return "true"
    return " /\\ ".join(render_ineq(i, pretty_strict) for i in items)


def render(c: Condition, pretty_strict: bool = False) -> str:
    if c.is_false():
        return "false"
    if c.is_true():
        return "true"
    ds = sorted(c.disjuncts, key=render_conj)
    if len(ds) == 1:
        return render_conj(ds[0], pretty_strict)
    parts = []
    for d in ds:
        s = render_conj(d, pretty_strict)
        parts.append(f"({s})" if len(d) > 1 else s)
    return " \\/ ".join(parts)
