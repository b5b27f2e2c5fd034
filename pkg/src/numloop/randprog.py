"""Random programs in the analysed fragment: at most 4 clauses, at most 2 integer
arguments, linear guards.  Used by property tests and the preservation script."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import Analyze, Call, Clause, Compare, Compound, Int, IsBinding, Pred, Program, Var

OPS = ("<", ">", "=<", ">=")


@dataclass
class GenConfig:
    max_clauses: int = 4
    max_arity: int = 2
    max_guards: int = 2
    const_range: int = 6
    p_mutual: float = 0.2
    p_constant_head: float = 0.1
    p_late_guard: float = 0.2
    p_double_call: float = 0.1
    p_guarded: float = 0.85  # recursive clauses with at least one prefix guard


def _add(e, k: int):
    if k > 0:
        return Compound("+", (e, Int(k)))
    if k < 0:
        return Compound("-", (e, Int(-k)))
    return e


def _lin(rng: random.Random, vs: list, cfg: GenConfig, need_var: bool = False):
    """A small linear expression over ``vs``."""
    terms = []
    for v in vs:
        a = rng.choice((0, 0, 1, 1, -1, 2))
        if need_var and not terms and v is vs[-1] and a == 0:
            a = 1
        if a:
            terms.append((a, v))
    if not terms:
        return Int(rng.randint(-cfg.const_range, cfg.const_range))
    e = None
    for a, v in terms:
        t = v if abs(a) == 1 else Compound("*", (Int(abs(a)), v))
        if e is None:
            e = t if a > 0 else Compound("-", (t,))
        else:
            e = Compound("+" if a > 0 else "-", (e, t))
    return _add(e, rng.randint(-3, 3))


def _guard(rng, vs, cfg):
    lhs = _lin(rng, rng.sample(vs, rng.randint(1, len(vs))), cfg, need_var=True)
    return Compare(rng.choice(OPS), lhs, Int(rng.randint(-cfg.const_range, cfg.const_range)))


def _clause(rng, head: Pred, callees: list, cfg: GenConfig, recursive: bool) -> Clause:
    vs = [Var(n) for n in ("X", "Y")[:head.arity]]
    hargs = list(vs)
    body = []
    if rng.random() < cfg.p_constant_head:
        i = rng.randrange(head.arity)
        hargs[i] = Int(rng.randint(-3, 3))
        vs = [v for j, v in enumerate(vs) if j != i] or []
    if vs:
        lo = 1 if recursive and rng.random() < cfg.p_guarded else 0
        for _ in range(rng.randint(lo, cfg.max_guards)):
            body.append(_guard(rng, vs, cfg))
    if recursive:
        ncalls = 2 if rng.random() < cfg.p_double_call else 1
        fresh = 0
        for _ in range(ncalls):
            callee = rng.choice(callees)
            args = []
            for _ in range(callee.arity):
                fresh += 1
                nv = Var(f"N{fresh}")
                src = vs if vs else []
                if src and rng.random() < 0.6:
                    expr = _add(rng.choice(src), rng.randint(-2, 2))
                elif src:
                    expr = _lin(rng, src, cfg)
                else:
                    expr = Int(rng.randint(-3, 3))
                body.append(IsBinding(nv, expr))
                args.append(nv)
            if rng.random() < cfg.p_late_guard:
                body.append(_guard(rng, args, cfg))
            body.append(Call(callee.name, tuple(args)))
        if rng.random() < cfg.p_late_guard and vs:
            body.append(_guard(rng, vs, cfg))
    return Clause(Call(head.name, tuple(hargs)), tuple(body))


def random_program(rng: random.Random, cfg: GenConfig = None) -> Program:
    cfg = cfg or GenConfig()
    k = rng.randint(1, cfg.max_arity)
    p = Pred("p", k)
    preds = [p]
    if rng.random() < cfg.p_mutual:
        preds.append(Pred("q", rng.randint(1, cfg.max_arity)))
    n = rng.randint(len(preds), cfg.max_clauses)
    owners = list(preds) + [rng.choice(preds) for _ in range(n - len(preds))]
    clauses = []
    for owner in owners:
        recursive = rng.random() < 0.6
        callees = preds if len(preds) > 1 else [p]
        if len(preds) > 1 and owner != p:
            callees = [p]
        clauses.append(_clause(rng, owner, callees, cfg, recursive))
    rng.shuffle(clauses)
    return Program(tuple(clauses), (Analyze(p),))
