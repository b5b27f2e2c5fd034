"""Adornment sets and the adorning transformation.

A predicate ``p`` of the analysed recursion class is split into versions
``p{a}``, one per adornment ``a`` of a partition of its integer argument
space.  Clauses are kept only when their maximal-prefix guards, linear ``is``
equalities and the adornments involved are jointly satisfiable; later
comparisons are deliberately ignored so that termination is preserved.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import lincon
from .interarg import Registry, literal_relation
from .lincon import Condition
from .prep import DependencyGraph, PrefixInfo, dependency_graph, maximal_prefix
from .syntax import Call, Clause, Pred, Program, Var

MAX_GUARDS = 16


def collect_guards(prog: Program, pm: dict, pred: Pred) -> list:
    """Distinct non-trivial maximal-prefix conditions of the clauses defining ``pred``."""
    out: list = []
    for c in prog.clauses_for(pred):
        cond = maximal_prefix(c, pm).condition
        if cond.is_true() or any(lincon.equivalent(cond, o) for o in out):
            continue
        out.append(cond)
    return out


def guard_tuned_set(conds) -> list:
    """All satisfiable sign combinations of ``conds`` (a guard-tuned partition)."""
    conds = list(conds)
    if len(conds) > MAX_GUARDS:
        raise lincon.CapacityError(f"{len(conds)} guards exceed the limit of {MAX_GUARDS}")
    if not conds:
        return [lincon.TRUE]
    negs = [lincon.negate(c) for c in conds]
    cells = [lincon.TRUE]
    for c, n in zip(conds, negs):
        nxt = []
        for cell in cells:
            for part in (c, n):
                x = lincon.conjoin(cell, part)
                if lincon.satisfiable(x):
                    nxt.append(x)
        cells = nxt
    out = []
    for cell in cells:
        s = lincon.simplify(cell)
        if not s.is_false():
            out.append(s)
    return sorted(set(out), key=lincon.render)


def is_guard_tuned(adornments, prog: Program, pm: dict, pred: Pred) -> bool:
    guards = [maximal_prefix(c, pm).condition for c in prog.clauses_for(pred)]
    for a in adornments:
        for g in guards:
            if lincon.satisfiable(lincon.conjoin(a, g)) and not lincon.entails(a, g):
                return False
    return True


def _safe_instance(cond: Condition, args) -> Condition:
    try:
        return lincon.instantiate(cond, args)
    except lincon.NonlinearAtom:
        return lincon.TRUE


def _rename_to_denoms(c: Condition, hmap: dict) -> Condition:
    return c.substitute({v: ({d: 1}, 0) for v, d in hmap.items()})


def extend_adornments(conds: dict, prog: Program, pm: dict, registry: Registry = None,
                      graph: DependencyGraph = None, max_rounds: int = None) -> dict:
    """Close per-predicate condition sets under extension (fixpoint).

    For each recursive call carrying a known condition, the weakest condition
    on the caller's head that makes the call satisfy it is added when it
    constrains an argument position not yet constrained for the caller.
    """
    registry = registry or Registry(prog)
    graph = graph or dependency_graph(prog)
    current = {p: list(cs) for p, cs in conds.items()}
    if max_rounds is None:
        max_rounds = sum(len(pm.get(p, ())) for p in current) + 1
    for _ in range(max_rounds + 1):
        additions: dict = {}
        for p in current:
            known = set().union(*(c.variables() for c in current[p])) if current[p] else set()
            for clause in prog.clauses_for(p):
                info = maximal_prefix(clause, pm)
                for k, lit in enumerate(clause.body):
                    if not isinstance(lit, Call) or lit.pred not in current or not graph.mutual(p, lit.pred):
                        continue
                    before = lincon.Condition.of(*info.local)
                    for prev in clause.body[info.length:k]:
                        if isinstance(prev, Call) and graph.mutual(p, prev.pred):
                            continue
                        before = lincon.conjoin(before, literal_relation(prev, registry))
                    for cq in current[lit.pred]:
                        ctx = lincon.conjoin(before, _safe_instance(cq, lit.args))
                        proj = lincon.project(ctx, info.head_map)
                        ext = lincon.simplify(_rename_to_denoms(proj, info.head_map))
                        if ext.is_true() or ext.is_false() or not (ext.variables() - known):
                            continue
                        pool = current[p] + additions.get(p, [])
                        if any(lincon.equivalent(ext, o) for o in pool):
                            continue
                        additions.setdefault(p, []).append(ext)
        if not additions:
            return current
        for p, new in additions.items():
            current[p] = current[p] + new
    raise lincon.CapacityError("adornment extension did not reach a fixpoint")


# --------------------------------------------------------------------------
# the transformation


@dataclass
class AdornedProgram:
    target: Pred
    adornments: dict  # base pred -> list of Condition
    clauses: list  # adorned clauses (P^a)
    provenance: list  # index into the source program's clauses, parallel to ``clauses``
    bridges: list = field(default_factory=list)
    directives: tuple = ()

    def program(self) -> Program:
        return Program(tuple(self.clauses), self.directives)

    def with_bridges(self) -> Program:
        return Program(tuple(self.bridges) + tuple(self.clauses), self.directives)

    def replace(self, keep: list) -> "AdornedProgram":
        return AdornedProgram(self.target, self.adornments,
                              [self.clauses[i] for i in keep], [self.provenance[i] for i in keep],
                              self.bridges, self.directives)


def consistency_base(clause: Clause, info: PrefixInfo, last_call: int) -> Condition:
    """Prefix inequalities and the linear ``is`` equalities preceding ``last_call``."""
    ineqs = list(info.local)
    for k, eq in info.is_equalities:
        if k < last_call:
            ineqs.extend(eq)
    return lincon.Condition.of(*ineqs)


def adorn_program(prog: Program, adornments: dict, target: Pred, pm: dict,
                  graph: DependencyGraph = None) -> AdornedProgram:
    graph = graph or dependency_graph(prog)
    klass = {p for p in graph.scc(target)} | {target}
    missing = [p for p in klass if p in graph.graph and p not in adornments]
    if missing:
        raise ValueError(f"no adornment set for {missing[0]}")

    clauses, prov = [], []
    for idx, clause in enumerate(prog.clauses):
        head_pred = clause.head.pred
        slots = [k for k, lit in enumerate(clause.body)
                 if isinstance(lit, Call) and lit.pred in klass]
        if head_pred not in klass and not slots:
            clauses.append(clause)
            prov.append(idx)
            continue
        info = maximal_prefix(clause, pm)
        base = consistency_base(clause, info, max(slots) if slots else -1)
        heads = adornments[head_pred] if head_pred in klass else [None]
        for a in heads:
            ctx = base if a is None else lincon.conjoin(base, lincon.instantiate(a, clause.head.args))
            if not lincon.satisfiable(ctx):
                continue
            for choice in _body_choices(clause, slots, adornments, ctx):
                body = list(clause.body)
                for k, b in zip(slots, choice):
                    body[k] = body[k].with_adornment(b)
                head = clause.head if a is None else clause.head.with_adornment(a)
                clauses.append(Clause(head, tuple(body)))
                prov.append(idx)
    pa = AdornedProgram(target, {p: list(adornments[p]) for p in klass if p in adornments},
                        clauses, prov, directives=prog.directives)
    pa.bridges = bridge_clauses(pa.adornments, target, graph)
    return pa


def _body_choices(clause: Clause, slots: list, adornments: dict, ctx: Condition):
    def go(i, cur, acc):
        if i == len(slots):
            yield tuple(acc)
            return
        call = clause.body[slots[i]]
        for b in adornments[call.pred]:
            nxt = lincon.conjoin(cur, _safe_instance(b, call.args))
            if lincon.satisfiable(nxt):
                yield from go(i + 1, nxt, acc + [b])

    yield from go(0, ctx, [])


def bridge_clauses(adornments: dict, target: Pred, graph: DependencyGraph = None) -> list:
    """``p(X1..Xn) :- p{a}(X1..Xn)`` for every class member ``p`` and adornment ``a``."""
    preds = sorted(adornments, key=lambda p: (p != target, p.name, p.arity))
    out = []
    for p in preds:
        if graph is not None and not graph.mutual(target, p):
            continue
        args = tuple(Var(f"X{i}") for i in range(1, p.arity + 1))
        for a in adornments[p]:
            out.append(Clause(Call(p.name, args), (Call(p.name, args, a),)))
    return out


def remove_irrelevant(pa: AdornedProgram, cond: Condition, q: Pred) -> AdornedProgram:
    """Keep clauses whose head is reachable from an adorned ``q`` consistent with ``cond``."""
    live = [a for a in pa.adornments.get(q.base(), [])
            if lincon.satisfiable(lincon.conjoin(a, cond))]
    graph = dependency_graph(pa.program())
    reach: set = set()
    for a in live:
        reach |= graph.reachable(Pred(q.name, q.arity, a))
    keep = [i for i, c in enumerate(pa.clauses) if c.head.pred in reach]
    return pa.replace(keep)

