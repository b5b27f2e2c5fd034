"""Interargument relations: exact ones for arithmetic builtins, declared ones otherwise."""
from __future__ import annotations

from . import lincon
from .prep import linear_is
from .syntax import Call, Compare, InterArg, IsBinding, Literal, Pred, Program, is_linear


class ScopeError(ValueError):
    pass


def builtin_relation(lit: Literal) -> lincon.Condition:
    """What a successful builtin guarantees about its variables; TRUE if nothing linear."""
    if isinstance(lit, Compare):
        if is_linear(lit.lhs) and is_linear(lit.rhs):
            return lincon.Condition.of(lincon.normalize(lit.op, lit.lhs, lit.rhs))
        return lincon.TRUE
    if isinstance(lit, IsBinding):
        eq = linear_is(lit)
        return lincon.TRUE if eq is None else lincon.Condition.of(*eq)
    raise TypeError(f"not a builtin literal: {lit!r}")


class Registry:
    """Declared relations, keyed by (unadorned) predicate."""

    def __init__(self, prog: Program = None):
        self.relations: dict = {}
        if prog is not None:
            for d in prog.directives:
                if isinstance(d, InterArg):
                    self.declare(d.pred, d.condition)

    def declare(self, pred: Pred, cond: lincon.Condition) -> None:
        for v in cond.variables():
            if not v.startswith("$") or not 1 <= int(v[1:]) <= pred.arity:
                raise ScopeError(f"{v} is not an argument position of {pred}")
        pred = pred.base()
        if pred in self.relations:
            cond = lincon.conjoin(self.relations[pred], cond)
        self.relations[pred] = cond

    def relation_for(self, pred: Pred) -> lincon.Condition:
        return self.relations.get(pred.base(), lincon.TRUE)

    def instance(self, call: Call) -> lincon.Condition:
        """The declared relation instantiated on the call's arguments (TRUE if unusable)."""
        rel = self.relation_for(call.pred)
        if rel.is_true():
            return rel
        try:
            return lincon.instantiate(rel, call.args)
        except lincon.NonlinearAtom:
            return lincon.TRUE


def literal_relation(lit: Literal, registry: Registry) -> lincon.Condition:
    if isinstance(lit, Call):
        return registry.instance(lit)
    return builtin_relation(lit)
