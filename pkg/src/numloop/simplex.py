"""Exact two-phase simplex over Fractions (Bland's rule), all variables >= 0."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class Unbounded(Exception):
    pass


@dataclass(frozen=True)
class Row:
    coeffs: dict  # variable -> number
    op: str  # "=", ">=", "<="
    rhs: object = 0


def _pivot(t, basis, r, c):
    pr = t[r]
    pv = pr[c]
    if pv != 1:
        t[r] = pr = [x / pv for x in pr]
    for i, row in enumerate(t):
        if i != r:
            f = row[c]
            if f:
                t[i] = [a - f * b for a, b in zip(row, pr)]
    basis[r] = c


def _run(t, basis, cost, allowed):
    """Minimise cost·x on tableau ``t`` (last column is the rhs)."""
    m = len(t)
    while True:
        # reduced costs
        enter = None
        for j in allowed:
            if j in basis:
                continue
            rc = cost[j] - sum(cost[basis[i]] * t[i][j] for i in range(m))
            if rc < 0:
                enter = j
                break
        if enter is None:
            return
        leave, best = None, None
        for i in range(m):
            a = t[i][enter]
            if a > 0:
                ratio = t[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise Unbounded
        _pivot(t, basis, leave, enter)


def minimize(objective: dict, rows: list, variables=None):
    """Return ``(value, assignment)`` or None when infeasible.

    Variables not mentioned anywhere are ignored; every variable is >= 0.
    """
    names = list(variables) if variables is not None else []
    seen = set(names)
    for r in rows:
        for v in r.coeffs:
            if v not in seen:
                seen.add(v)
                names.append(v)
    for v in objective:
        if v not in seen:
            seen.add(v)
            names.append(v)
    n = len(names)
    col = {v: i for i, v in enumerate(names)}

    norm = []
    for r in rows:
        co = {v: Fraction(a) for v, a in r.coeffs.items() if a}
        rhs, op = Fraction(r.rhs), r.op
        if rhs < 0:
            co = {v: -a for v, a in co.items()}
            rhs = -rhs
            op = {"=": "=", ">=": "<=", "<=": ">="}[op]
        if not co:
            if (op == "=" and rhs != 0) or (op == ">=" and rhs > 0):
                return None
            continue
        norm.append((co, op, rhs))

    n_slack = sum(1 for _, op, _ in norm if op != "=")
    n_art = sum(1 for _, op, _ in norm if op != "<=")
    width = n + n_slack + n_art + 1
    t, basis = [], []
    s_i, a_i = n, n + n_slack
    arts = []
    for co, op, rhs in norm:
        row = [Fraction(0)] * width
        for v, a in co.items():
            row[col[v]] = a
        row[-1] = rhs
        if op == "<=":
            row[s_i] = Fraction(1)
            basis.append(s_i)
            s_i += 1
        else:
            if op == ">=":
                row[s_i] = Fraction(-1)
                s_i += 1
            row[a_i] = Fraction(1)
            basis.append(a_i)
            arts.append(a_i)
            a_i += 1
        t.append(row)

    real = list(range(n + n_slack))
    if arts:
        cost1 = [Fraction(0)] * (width - 1)
        for j in arts:
            cost1[j] = Fraction(1)
        _run(t, basis, cost1, real + arts)
        if sum(t[i][-1] for i, b in enumerate(basis) if b in arts) > 0:
            return None
        art_set = set(arts)
        i = 0
        while i < len(t):
            if basis[i] in art_set:
                j = next((j for j in real if t[i][j] != 0), None)
                if j is None:
                    del t[i]
                    del basis[i]
                    continue
                _pivot(t, basis, i, j)
            i += 1
        t = [row[:n + n_slack] + [row[-1]] for row in t]

    cost2 = [Fraction(0)] * (n + n_slack)
    for v, a in objective.items():
        cost2[col[v]] = Fraction(a)
    _run(t, basis, cost2, real)
    values = {v: Fraction(0) for v in names}
    for i, b in enumerate(basis):
        if b < n:
            values[names[b]] = t[i][-1]
    value = sum(Fraction(a) * values[v] for v, a in objective.items())
    return value, values


def feasible(rows: list) -> bool:
    return minimize({}, rows) is not None
