"""Integer argument positions, partial normalisation, maximal prefixes, call graph."""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from . import lincon
from .syntax import (
    Call, Clause, Compare, Compound, Int, IntPos, IsBinding, Pred, Program, Var,
    is_arith, is_linear, literal_vars, clause_vars,
)


class PositionConflict(ValueError):
    pass


def integer_positions(prog: Program) -> dict:
    """Map each predicate to the set of its integer argument positions.

    A position is inferred integer when, in every defining clause, the head
    term there is an integer or a variable that the clause uses in arithmetic
    or passes to an integer position of a body call.  Iterated to a least
    fixpoint; ``:- intpos`` declarations are added on top.
    """
    declared: dict = {}
    for d in prog.directives:
        if isinstance(d, IntPos):
            declared.setdefault(d.pred, set()).update(d.positions)

    preds = prog.predicates()
    for p in declared:
        if p not in preds:
            preds.append(p)
    pm = {p: set(declared.get(p, ())) for p in preds}

    # body calls passing a non-arithmetic compound block a position
    blocked: dict = {}
    for c in prog.clauses:
        for lit in c.body:
            if isinstance(lit, Call):
                for i, a in enumerate(lit.args, 1):
                    if isinstance(a, Compound) and not is_arith(a):
                        blocked.setdefault(lit.pred, set()).add(i)

    for p, ps in declared.items():
        for c in prog.clauses_for(p):
            for i in ps:
                t = c.head.args[i - 1]
                if isinstance(t, Compound):
                    raise PositionConflict(
                        f"{p}: declared integer position {i} holds compound term in a clause head")

    changed = True
    while changed:
        changed = False
        for p in preds:
            clauses = prog.clauses_for(p)
            if not clauses:
                continue
            for i in range(1, p.arity + 1):
                if i in pm[p] or i in blocked.get(p, ()):
                    continue
                if all(_int_evidence(c, c.head.args[i - 1], pm) for c in clauses):
                    pm[p].add(i)
                    changed = True
    return {p: frozenset(s) for p, s in pm.items()}


def _int_evidence(c: Clause, t, pm: dict) -> bool:
    if isinstance(t, Int):
        return True
    if not isinstance(t, Var):
        return False
    for lit in c.body:
        if isinstance(lit, (Compare, IsBinding)):
            if t in literal_vars(lit):
                return True
        elif isinstance(lit, Call):
            for i in pm.get(lit.pred, ()):
                if t == lit.args[i - 1]:
                    return True
    return False


def _fresh_names(used: set):
    k = 0
    while True:
        for ch in "ABCDEFGHIJKLMNOPQRSTUVWXYZ":
            name = ch if k == 0 else f"{ch}{k}"
            if name not in used:
                used.add(name)
                yield name
        k += 1


def normalise_clause(c: Clause, positions) -> Clause:
    used = {v.name for v in clause_vars(c)}
    fresh = _fresh_names(used)
    seen: set = set()
    args = list(c.head.args)
    extra = []
    for i in sorted(positions):
        t = args[i - 1]
        if isinstance(t, Var) and t not in seen:
            seen.add(t)
            continue
        v = Var(next(fresh))
        args[i - 1] = v
        seen.add(v)
        extra += [Compare(">=", v, t), Compare("=<", v, t)]
    if not extra:
        return c
    return Clause(Call(c.head.name, tuple(args), c.head.adornment), tuple(extra) + c.body)


def partially_normalise(prog: Program, pm: dict) -> Program:
    clauses = tuple(normalise_clause(c, pm.get(c.head.pred, ())) for c in prog.clauses)
    return Program(clauses, prog.directives)


# --------------------------------------------------------------------------
# maximal prefix


@dataclass
class PrefixInfo:
    clause: Clause
    length: int
    literals: tuple
    condition: lincon.Condition  # over head denominators
    local: frozenset  # the same inequalities over clause variables
    head_map: dict  # clause variable name -> "$i"
    is_equalities: list = field(default_factory=list)  # (body index, [LinIneq, LinIneq])


def head_denominators(c: Clause, positions) -> dict:
    out = {}
    for i in sorted(positions):
        t = c.head.args[i - 1]
        if isinstance(t, Var) and t.name not in out:
            out[t.name] = f"${i}"
    return out


def linear_is(lit: IsBinding):
    """The equality ``target = expr`` as inequalities, or None if nonlinear."""
    if not (is_linear(lit.expr) and is_linear(lit.target)):
        return None
    return [lincon.normalize(">=", lit.target, lit.expr), lincon.normalize("=<", lit.target, lit.expr)]


def maximal_prefix(c: Clause, pm: dict) -> PrefixInfo:
    positions = pm.get(c.head.pred, frozenset())
    hmap = head_denominators(c, positions)
    lits, ineqs = [], []
    for lit in c.body:
        if not isinstance(lit, Compare):
            break
        vs = literal_vars(lit)
        if any(v.name not in hmap for v in vs):
            break
        if not (is_linear(lit.lhs) and is_linear(lit.rhs)):
            break
        lits.append(lit)
        ineqs.append(lincon.normalize(lit.op, lit.lhs, lit.rhs))
    local = lincon.make_conj(ineqs)
    if local is None:
        local = frozenset([lincon.CONTRADICTION])
    mapping = {v: ({d: 1}, 0) for v, d in hmap.items()}
    cond = lincon.simplify(lincon.Condition.of(*ineqs).substitute(mapping))
    eqs = []
    for k, lit in enumerate(c.body):
        if isinstance(lit, IsBinding):
            e = linear_is(lit)
            if e is not None:
                eqs.append((k, e))
    return PrefixInfo(c, len(lits), tuple(lits), cond, local, hmap, eqs)


# --------------------------------------------------------------------------
# dependency graph


class DependencyGraph:
    """``refers to`` graph over predicates with SCC-based mutual recursion."""

    def __init__(self, prog: Program):
        g = nx.DiGraph()
        for c in prog.clauses:
            g.add_node(c.head.pred)
            for lit in c.body:
                if isinstance(lit, Call):
                    g.add_edge(c.head.pred, lit.pred)
        self.graph = g
        self._scc = {}
        for comp in nx.strongly_connected_components(g):
            fz = frozenset(comp)
            for p in comp:
                self._scc[p] = fz

    def scc(self, p: Pred) -> frozenset:
        return self._scc.get(p, frozenset([p]))

    def mutual(self, p: Pred, q: Pred) -> bool:
        """p ~= q (reflexive)."""
        return p == q or q in self.scc(p)

    def depends(self, p: Pred, q: Pred) -> bool:
        """p depends on q: reflexive-transitive closure of ``refers to``."""
        if p == q:
            return True
        if p not in self.graph:
            return False
        return q in nx.descendants(self.graph, p)

    def reachable(self, p: Pred) -> set:
        if p not in self.graph:
            return {p}
        return {p} | nx.descendants(self.graph, p)

    def is_recursive(self, p: Pred) -> bool:
        return len(self.scc(p)) > 1 or self.graph.has_edge(p, p)

    def strictly_above(self, p: Pred, q: Pred) -> bool:
        return self.depends(p, q) and not self.depends(q, p)


def dependency_graph(prog: Program) -> DependencyGraph:
    return DependencyGraph(prog)
