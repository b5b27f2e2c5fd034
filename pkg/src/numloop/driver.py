"""The inference loop: adorn, try to prove each adornment, refine, repeat."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import lincon
from .acceptability import Failed, NeedsCondition, Solved, decrease_obligations, farkas_system, solve
from .adorn import (
    AdornedProgram, adorn_program, collect_guards, extend_adornments, guard_tuned_set, remove_irrelevant,
)
from .interarg import Registry
from .lincon import Condition
from .prep import dependency_graph, integer_positions, partially_normalise
from .syntax import Pred, Program

PROVEN_NONRECURSIVE = "proven_nonrecursive"
PROVEN_ACCEPTABLE = "proven_acceptable"
PENDING = "pending"
UNKNOWN = "unknown"


@dataclass
class InferConfig:
    max_iter: int = None  # rounds; default 2 x integer positions of the class
    extend: bool = True


@dataclass
class AdornmentStatus:
    adornment: Condition
    status: str
    detail: object = None  # assignment, or a failure reason


@dataclass
class Round:
    number: int
    condition: Condition  # accumulated condition c at the start of the round
    adornments: dict  # base pred -> list of Condition
    program_size: int
    attempts: list = field(default_factory=list)  # (ConstraintSystem, outcome)
    statuses: list = field(default_factory=list)


@dataclass
class TerminationReport:
    query: Pred
    condition: Condition
    adornments: list  # AdornmentStatus of the query predicate in the last round
    rounds: list
    limit_hit: bool = False

    @property
    def iterations(self) -> int:
        return len(self.rounds)

    def text(self, pretty_strict: bool = False) -> str:
        return f"{self.query} terminates if: {lincon.render(self.condition, pretty_strict)}"

    def to_json(self, pretty_strict: bool = False) -> dict:
        return {
            "query": str(self.query),
            "condition": lincon.render(self.condition, pretty_strict),
            "adornments": [{"condition": lincon.render(s.adornment, pretty_strict), "status": s.status}
                           for s in self.adornments],
            "rounds": len(self.rounds),
            "limit_hit": self.limit_hit,
        }

    def json(self, pretty_strict: bool = False) -> str:
        return json.dumps(self.to_json(pretty_strict), indent=2)


def proven_by_nonrecursion(pa: AdornedProgram, q: Pred, graph=None) -> set:
    """Adornments ``a`` of ``q`` from which no recursive predicate of P^a is reachable."""
    graph = graph or dependency_graph(pa.program())
    out = set()
    for a in pa.adornments.get(q.base(), []):
        reach = graph.reachable(Pred(q.name, q.arity, a))
        if not any(graph.is_recursive(p) for p in reach):
            out.add(a)
    return out


def _pools(prog: Program, pm: dict, klass, refinements: dict, extend: bool, registry, graph) -> dict:
    pools = {p: collect_guards(prog, pm, p) + list(refinements.get(p, ())) for p in klass}
    if extend:
        pools = extend_adornments(pools, prog, pm, registry, graph)
    return pools


class NoTarget(ValueError):
    pass


def target(prog: Program, q: Pred = None) -> Pred:
    if q is None:
        targets = prog.analyze_targets()
        if not targets:
            raise NoTarget("no analyze directive and no query predicate given")
        q = targets[0]
    if q not in prog.predicates():
        raise NoTarget(f"{q} is not defined by the program")
    return q


def infer(prog: Program, q: Pred = None, config: InferConfig = None) -> TerminationReport:
    config = config or InferConfig()
    q = target(prog, q)
    pm = integer_positions(prog)
    prog = partially_normalise(prog, pm)
    registry = Registry(prog)
    graph = dependency_graph(prog)
    klass = sorted(graph.scc(q) | {q}, key=lambda p: (p != q, p.name, p.arity))
    limit = config.max_iter
    if limit is None:
        limit = max(1, 2 * sum(len(pm.get(p, ())) for p in klass))

    c = lincon.TRUE
    refinements: dict = {}
    proven: list = []  # (adornment, condition of the round)
    rounds: list = []
    statuses: list = []
    limit_hit = False

    while True:
        if len(rounds) >= limit:
            limit_hit = True
            break
        pools = _pools(prog, pm, klass, refinements, config.extend, registry, graph)
        adornments = {p: guard_tuned_set(pools[p]) for p in klass}
        pa = remove_irrelevant(adorn_program(prog, adornments, q, pm, graph), c, q)
        rnd = Round(len(rounds) + 1, c, adornments, len(pa.clauses))
        rounds.append(rnd)
        agraph = dependency_graph(pa.program())

        status = {}
        for a in adornments[q]:
            if not lincon.satisfiable(lincon.conjoin(a, c)):
                status[a] = AdornmentStatus(a, UNKNOWN, "inconsistent with the accumulated condition")
        for a in proven_by_nonrecursion(pa, q, agraph):
            if a not in status:
                status[a] = AdornmentStatus(a, PROVEN_NONRECURSIVE)
        pending = [a for a in adornments[q] if a not in status]

        refined = None
        while pending:
            reach = {}
            for a in pending:
                reach[a] = agraph.reachable(Pred(q.name, q.arity, a))
            live = set().union(*reach.values())
            ids = [i for i, cl in enumerate(pa.clauses) if cl.head.pred in live]
            obls = decrease_obligations(pa, pm, registry, ids, agraph)
            system = farkas_system(obls)
            outcome = solve(system, pools)
            rnd.attempts.append((system, outcome))
            if isinstance(outcome, Solved):
                for a in pending:
                    status[a] = AdornmentStatus(a, PROVEN_ACCEPTABLE, outcome.assignment)
                pending = []
            elif isinstance(outcome, NeedsCondition):
                refined = outcome
                break
            else:
                bad = outcome.predicates
                hit = [a for a in pending if reach[a] & bad] or list(pending)
                for a in hit:
                    status[a] = AdornmentStatus(a, UNKNOWN, "no level mapping found")
                pending = [a for a in pending if a not in hit]

        for a in adornments[q]:
            st = status.get(a)
            if st is not None and st.status in (PROVEN_NONRECURSIVE, PROVEN_ACCEPTABLE):
                proven.append((a, c))
        statuses = [status.get(a, AdornmentStatus(a, PENDING)) for a in adornments[q]]
        rnd.statuses = statuses
        if refined is None:
            break
        p = refined.predicate.base()
        refinements.setdefault(p, []).append(refined.condition)
        if p == q:
            head = refined.predicate.adornment
            c = lincon.simplify(lincon.conjoin(c, lincon.disjoin(lincon.negate(head), refined.condition)))

    cond = lincon.FALSE
    for a, rc in proven:
        cond = lincon.disjoin(cond, lincon.conjoin(a, rc))
    cond = lincon.simplify(cond)
    return TerminationReport(q, cond, statuses, rounds, limit_hit)


def first_round(prog: Program, q: Pred = None, extend: bool = True) -> AdornedProgram:
    """The adorned program (with bridges attached) built from guards alone, as in round one."""
    q = target(prog, q)
    pm = integer_positions(prog)
    prog = partially_normalise(prog, pm)
    graph = dependency_graph(prog)
    klass = sorted(graph.scc(q) | {q}, key=lambda p: (p != q, p.name, p.arity))
    pools = _pools(prog, pm, klass, {}, extend, Registry(prog), graph)
    return adorn_program(prog, {p: guard_tuned_set(pools[p]) for p in klass}, q, pm, graph)


def adorned_with(prog: Program, q: Pred, adornments: dict) -> AdornedProgram:
    """Adorn ``prog`` (partially normalised first) with given adornment sets."""
    pm = integer_positions(prog)
    return adorn_program(partially_normalise(prog, pm), adornments, q, pm)
