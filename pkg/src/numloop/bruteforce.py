"""Vectorised enumeration of integer points, for checking conditions and certificates."""
from __future__ import annotations

import numpy as np

from . import lincon
from .lincon import Condition, LinIneq


def grid(k: int, lo: int, hi: int) -> np.ndarray:
    """All points of ``[lo, hi]^k`` as an ``(N, k)`` int64 array."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    axes = np.meshgrid(*([np.arange(lo, hi + 1, dtype=np.int64)] * k), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=1)


def ineq_mask(i: LinIneq, names: list, pts: np.ndarray) -> np.ndarray:
    col = {v: j for j, v in enumerate(names)}
    val = np.full(len(pts), i.const, dtype=np.int64)
    for v, a in i.coeffs:
        val += a * pts[:, col[v]]
    return val >= 0


def conj_mask(conj, names: list, pts: np.ndarray) -> np.ndarray:
    m = np.ones(len(pts), dtype=bool)
    for i in conj:
        m &= ineq_mask(i, names, pts)
    return m


def cond_mask(c: Condition, names: list, pts: np.ndarray) -> np.ndarray:
    m = np.zeros(len(pts), dtype=bool)
    for d in c.disjuncts:
        m |= conj_mask(d, names, pts)
    return m


def _equalities(conj) -> list:
    s = set(conj)
    out = []
    for i in sorted(conj, key=lincon.render_ineq_key):
        neg = LinIneq.make({v: -a for v, a in i.coeffs}, -i.const)
        if neg in s and neg not in out:
            out.append(i)
    return out


def _subst(form: tuple, v: str, expr: tuple) -> tuple:
    co, k = form
    a = co.get(v, 0)
    if not a:
        return form
    out = {w: b for w, b in co.items() if w != v}
    for w, b in expr[0].items():
        out[w] = out.get(w, 0) + a * b
    return {w: b for w, b in out.items() if b}, k + a * expr[1]


def context_models(conj, box: int, variables=()) -> tuple:
    """Integer models of a conjunction, as ``(names, points)``.

    Variables determined by an equality with a unit coefficient are computed
    from the others; the remaining ones range over ``[-box, box]``.
    """
    names = sorted({v for i in conj for v in i.variables()} | set(variables), key=lincon.var_order)
    determined: dict = {}
    for e in _equalities(conj):
        form = (dict(e.coeffs), e.const)
        for v, expr in determined.items():
            form = _subst(form, v, expr)
        unit = [v for v in sorted(form[0], key=lincon.var_order) if abs(form[0][v]) == 1]
        if not unit:
            continue
        v = unit[0]
        a = form[0][v]
        expr = ({w: -b * a for w, b in form[0].items() if w != v}, -form[1] * a)
        for w in list(determined):
            determined[w] = _subst(determined[w], v, expr)
        determined[v] = expr
    free = [v for v in names if v not in determined]
    pts_free = grid(len(free), -box, box)
    cols = {v: pts_free[:, j] for j, v in enumerate(free)}
    n = len(pts_free)
    for v, (co, k) in determined.items():
        val = np.full(n, k, dtype=np.int64)
        for w, b in co.items():
            val += b * cols[w]
        cols[v] = val
    pts = np.stack([cols[v] for v in names], axis=1) if names else np.zeros((n, 0), dtype=np.int64)
    return names, pts[conj_mask(conj, names, pts)]
