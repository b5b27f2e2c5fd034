"""Level-mapping synthesis for adorned programs.

Each adorned predicate gets a level mapping ``sum(c_j * e_j)`` where ``e_j >= 0``
are its adornment's conjuncts (primitive level mappings) and ``c_j`` are
unknown naturals.  Every recursive call must strictly decrease the level under
its context; Farkas' lemma turns these decreases into linear constraints on the
``c_j`` and nonnegative multipliers, solved exactly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lincon, simplex
from .bruteforce import context_models
from .adorn import AdornedProgram
from .interarg import Registry, builtin_relation
from .lincon import Condition, LinIneq
from .prep import DependencyGraph, dependency_graph, head_denominators
from .syntax import Call, Clause, Pred, render_pred_name


@dataclass(frozen=True)
class Primitive:
    owner: Pred
    guard: LinIneq  # conjunct of the owner's adornment, as expr >= 0
    symbol: str

    def form(self, args) -> tuple:
        """``(coeffs, const)`` of the primitive on call arguments ``args``."""
        out: dict = {}
        const = self.guard.const
        for v, a in self.guard.coeffs:
            c, k = lincon.linear_form(args[int(v[1:]) - 1])
            for w, b in c.items():
                out[w] = out.get(w, 0) + a * b
            const += a * k
        return {w: b for w, b in out.items() if b}, const


@dataclass(frozen=True)
class LevelMapTemplate:
    owner: Pred
    terms: tuple  # of Primitive

    def __str__(self):
        if not self.terms:
            return f"|{render_pred_name(self.owner.name, self.owner.adornment)}| = 0"
        parts = [f"{t.symbol}*({lincon._fmt_sum(list(t.guard.coeffs), t.guard.const)})" for t in self.terms]
        return f"|{render_pred_name(self.owner.name, self.owner.adornment)}| = " + " + ".join(parts)


def _symbol(owner: Pred, k: int) -> str:
    return f"c[{render_pred_name(owner.name, owner.adornment)}#{k}]"


def level_map_template(owner: Pred) -> LevelMapTemplate:
    """One coefficient per conjunct of a single-conjunction adornment, nothing otherwise."""
    a = owner.adornment
    if a is None or not a.is_conjunction():
        return LevelMapTemplate(owner, ())
    terms = tuple(Primitive(owner, g, _symbol(owner, k)) for k, g in enumerate(a.conjuncts(), 1))
    return LevelMapTemplate(owner, terms)


# --------------------------------------------------------------------------
# obligations


@dataclass
class DecreaseObligation:
    clause_id: int  # index into the adorned program's clauses
    call_index: int  # body position of the recursive call
    head: Pred
    callee: Pred
    context: frozenset  # LinIneq over clause variables
    head_form: dict  # symbol -> (coeffs, const)
    call_form: dict
    head_vars: dict  # clause variable -> "$i"
    forced_zero: tuple = ()  # symbols whose primitive is not linear on these arguments

    def difference(self, assignment: dict) -> tuple:
        """``head - call`` under a coefficient assignment, as ``(coeffs, const)``."""
        out: dict = {}
        const = 0
        for sign, form in ((1, self.head_form), (-1, self.call_form)):
            for s, (co, k) in form.items():
                c = assignment.get(s, 0)
                if not c:
                    continue
                for v, a in co.items():
                    out[v] = out.get(v, 0) + sign * c * a
                const += sign * c * k
        return {v: a for v, a in out.items() if a}, const


def _form(template: LevelMapTemplate, args) -> tuple:
    out, zero = {}, []
    for t in template.terms:
        try:
            out[t.symbol] = t.form(args)
        except lincon.NonlinearAtom:
            zero.append(t.symbol)
    return out, zero


def _instance(cond: Condition, args) -> Condition:
    try:
        return lincon.instantiate(cond, args)
    except lincon.NonlinearAtom:
        return lincon.TRUE


def decrease_obligations(pa: AdornedProgram, pm: dict, registry: Registry = None,
                         clause_ids=None, graph: DependencyGraph = None) -> list:
    """One obligation per (clause, recursive call, context disjunct).

    The context holds everything known when the call is selected: the head
    adornment, all earlier comparisons and linear ``is`` equalities, the
    adornments of earlier adorned calls, declared relations of other earlier
    calls, and the callee's own adornment.
    """
    registry = registry or Registry()
    prog = pa.program()
    graph = graph or dependency_graph(prog)
    ids = range(len(pa.clauses)) if clause_ids is None else sorted(clause_ids)
    out = []
    for cid in ids:
        clause = pa.clauses[cid]
        hp = clause.head.pred
        positions = pm.get(hp.base(), frozenset())
        hmap = head_denominators(clause, positions)
        htpl = level_map_template(hp)
        hform, hzero = _form(htpl, clause.head.args)
        ctx = lincon.TRUE if hp.adornment is None else _instance(hp.adornment, clause.head.args)
        for k, lit in enumerate(clause.body):
            if isinstance(lit, Call):
                mine = lit.adornment is not None
                if graph.mutual(hp, lit.pred):
                    callee_ctx = ctx
                    if mine:
                        callee_ctx = lincon.conjoin(ctx, _instance(lit.adornment, lit.args))
                    cform, czero = _form(level_map_template(lit.pred), lit.args)
                    for d in sorted(callee_ctx.disjuncts, key=lincon.render_conj):
                        out.append(DecreaseObligation(cid, k, hp, lit.pred, d, hform, cform, hmap,
                                                      tuple(hzero + czero)))
                rel = _instance(lit.adornment, lit.args) if mine else registry.instance(lit)
                ctx = lincon.conjoin(ctx, rel)
            else:
                ctx = lincon.conjoin(ctx, builtin_relation(lit))
            if ctx.is_false():
                break
    return out


# --------------------------------------------------------------------------
# Farkas reduction


@dataclass
class ConstraintSystem:
    symbols: list
    obligations: list
    rows: list  # simplex.Row
    row_origin: list  # obligation index per row, None for global rows
    multipliers: dict = field(default_factory=dict)  # obligation index -> [(name, LinIneq)]

    def render(self) -> str:
        lines = []
        names = self.symbols + [n for o in sorted(self.multipliers) for n, _ in self.multipliers[o]]
        order = {n: i for i, n in enumerate(names)}
        for r in self.rows:
            terms = sorted(r.coeffs.items(), key=lambda p: order.get(p[0], len(order)))
            lhs = " + ".join(f"{a}*{v}" for v, a in terms if a) or "0"
            lhs = lhs.replace("+ -", "- ")
            lines.append(f"{lhs} {r.op} {r.rhs}")
        for n in names:
            lines.append(f"{n} >= 0")
        return "\n".join(lines)


def farkas_system(obls: list) -> ConstraintSystem:
    """Encode ``head - call - 1 = sum(lambda_m * g_m) + s`` for every obligation."""
    symbols: list = []
    seen = set()
    for o in obls:
        for s in itertools.chain(o.head_form, o.call_form, o.forced_zero):
            if s not in seen:
                seen.add(s)
                symbols.append(s)
    rows, origin, mults = [], [], {}
    for j, o in enumerate(obls):
        ctx = sorted(o.context, key=lincon.render_ineq_key)
        lam = [(f"l{j}_{m}", g) for m, g in enumerate(ctx, 1)]
        mults[j] = lam
        variables = set()
        for form in (o.head_form, o.call_form):
            for co, _ in form.values():
                variables |= set(co)
        for g in ctx:
            variables |= g.variables()
        for v in sorted(variables, key=lincon.var_order):
            co: dict = {}
            for sign, form in ((1, o.head_form), (-1, o.call_form)):
                for s, (c, _) in form.items():
                    if c.get(v):
                        co[s] = co.get(s, 0) + sign * c[v]
            for name, g in lam:
                a = g.coeff(v)
                if a:
                    co[name] = -a
            rows.append(simplex.Row(co, "=", 0))
            origin.append(j)
        co = {}
        for sign, form in ((1, o.head_form), (-1, o.call_form)):
            for s, (_, k) in form.items():
                if k:
                    co[s] = co.get(s, 0) + sign * k
        for name, g in lam:
            if g.const:
                co[name] = -g.const
        rows.append(simplex.Row(co, ">=", 1))
        origin.append(j)
        for s in o.forced_zero:
            rows.append(simplex.Row({s: 1}, "=", 0))
            origin.append(j)
    return ConstraintSystem(symbols, obls, rows, origin, mults)


# --------------------------------------------------------------------------
# solving


@dataclass
class Solved:
    assignment: dict  # symbol -> natural


@dataclass
class NeedsCondition:
    predicate: Pred  # adorned predicate whose adornment the condition refines
    condition: Condition  # over the predicate's denominators
    obligation: DecreaseObligation = None


@dataclass
class Failed:
    failed: list  # obligations that cannot be satisfied
    predicates: set = field(default_factory=set)


def _solve_rows(symbols, rows):
    res = simplex.minimize({s: 1 for s in symbols}, rows, symbols)
    if res is None:
        return None
    _, values = res
    coeffs = {s: values.get(s, Fraction(0)) for s in symbols}
    scale = 1
    for c in coeffs.values():
        scale = scale * c.denominator // math.gcd(scale, c.denominator)
    return {s: int(c * scale) for s, c in coeffs.items()}


def solve(system: ConstraintSystem, pool: dict = None) -> object:
    """Solved, NeedsCondition or Failed for a constraint system.

    ``pool`` maps base predicates to conditions already in use; a proposal
    equivalent to one of them is not offered again.
    """
    a = _solve_rows(system.symbols, system.rows)
    if a is not None:
        return Solved(a)
    bad = []
    for j, o in enumerate(system.obligations):
        rows = [r for r, k in zip(system.rows, system.row_origin) if k == j]
        syms = [s for s in system.symbols if s in o.head_form or s in o.call_form or s in o.forced_zero]
        if _solve_rows(syms, rows) is None:
            bad.append(o)
    if not bad:
        # only jointly infeasible: a cycle between mappings, not a missing condition
        return Failed(list(system.obligations), {o.head for o in system.obligations})
    prop = propose_condition(bad, pool or {})
    if prop is not None:
        return prop
    return Failed(bad, {o.head for o in bad})


def _projection(conj, keep: dict) -> frozenset:
    drop = {v for i in conj for v in i.variables()} - set(keep)
    return lincon.eliminate(conj, drop)


def _to_denoms(ineqs, hmap: dict) -> list:
    mapping = {v: ({d: 1}, 0) for v, d in hmap.items()}
    return [i.substitute(mapping) for i in ineqs]


def _candidates(o: DecreaseObligation):
    seen = []
    for s in itertools.chain(o.head_form, o.call_form):
        if s not in seen and s not in o.forced_zero:
            seen.append(s)
    return seen


def propose_condition(obls: list, pool: dict = None):
    """Unit-coefficient search for an extra condition on a failing head adornment.

    For template term ``s`` the residual ``R = head - call`` with ``s = 1`` and
    every other coefficient 0 must reach ``R >= 1``; the part of
    ``context /\\ R >= 1`` over the head denominators that the context does not
    already imply is proposed, minimised greedily.
    """
    pool = pool or {}
    cands = []
    for j, o in enumerate(obls):
        for rank, s in enumerate(_candidates(o)):
            cands.append((rank, j, s))
    cands.sort(key=lambda t: (t[0], t[1]))
    for _, j, s in cands:
        o = obls[j]
        co, k = o.difference({s: 1})
        need = LinIneq.make(co, k - 1)
        if need.is_contradiction or need.is_trivial:
            continue
        ctx = frozenset(o.context)
        with_need = _projection(ctx | {need}, o.head_vars)
        if lincon.CONTRADICTION in with_need:
            continue
        base = _projection(ctx, o.head_vars)
        extra = [i for i in sorted(with_need, key=lincon.render_ineq_key)
                 if not lincon.conj_entails_ineq(base, i)]
        if not extra or not lincon.conj_entails_ineq(ctx | set(extra), need):
            continue
        # drop what is not needed for the residual
        for i in list(extra):
            trial = [x for x in extra if x != i]
            if trial and lincon.conj_entails_ineq(ctx | set(trial), need):
                extra = trial
        d = lincon.simplify(Condition.of(*_to_denoms(extra, o.head_vars)))
        if d.is_true() or d.is_false() or not any(v.startswith("$") for v in d.variables()):
            continue
        if any(lincon.equivalent(d, p) for p in pool.get(o.head.base(), ())):
            continue
        return NeedsCondition(o.head, d, o)
    return None


def check_certificate(o: DecreaseObligation, assignment: dict, box: int = 50) -> int:
    """Number of integer context models (free variables in ``[-box, box]``,
    the rest solved from equalities) where ``head - call >= 1`` fails."""
    co, k = o.difference(assignment)
    names, pts = context_models(o.context, box, set(co))
    col = {v: j for j, v in enumerate(names)}
    val = np.full(len(pts), k, dtype=np.int64)
    for v, a in co.items():
        val += a * pts[:, col[v]]
    return int((val < 1).sum())
