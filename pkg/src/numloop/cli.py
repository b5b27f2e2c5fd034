"""``numloop`` command line: analyze, adorn, check, explain."""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass

from . import lincon
from .driver import InferConfig, NoTarget, adorned_with, first_round, infer, target
from .interarg import ScopeError
from .oracle import box_points, box_query, compare_semantics, validate_condition
from .prep import PositionConflict, integer_positions
from .syntax import ParseError, Pred, Program, parse_program, render_program

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY, EXIT_CHECK = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    path: str
    query: Pred = None
    max_iter: int = None
    extend: bool = True
    box: tuple = (-10, 10)
    steps: int = 100_000
    fmt: str = "text"
    emit_constraints: bool = False
    pretty_strict: bool = False

    def __post_init__(self):
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("--max-iter must be positive")
        if self.steps < 1:
            raise ValueError("--steps must be positive")
        if self.box[0] > self.box[1]:
            raise ValueError("--box needs lo =< hi")


def _pred(text: str) -> Pred:
    m = re.fullmatch(r"\s*([a-z][A-Za-z0-9_]*)\s*/\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected name/arity, got {text!r}")
    return Pred(m.group(1), int(m.group(2)))


def _box(text: str) -> tuple:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}")
    return int(m.group(1)), int(m.group(2))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors; 2 is reserved for capacity
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="numloop", description="Termination conditions for integer logic programs.")
    ap.add_argument("command", choices=["analyze", "adorn", "check", "explain"])
    ap.add_argument("file")
    ap.add_argument("--query", type=_pred, help="predicate to analyse, as name/arity")
    ap.add_argument("--max-iter", type=int, help="round limit (default: 2 x integer positions)")
    ap.add_argument("--no-extend", action="store_true", help="do not extend guard conditions")
    ap.add_argument("--box", type=_box, default=(-10, 10), help="query range for check, lo..hi")
    ap.add_argument("--steps", type=int, default=100_000, help="oracle step budget for check")
    ap.add_argument("--format", choices=["text", "json"], default="text")
    ap.add_argument("--emit-constraints", action="store_true", help="print constraint systems")
    ap.add_argument("--pretty-strict", action="store_true", help="print $1 >= 6 as $1 > 5")
    return ap


def _config(ns) -> RunConfig:
    return RunConfig(ns.command, ns.file, ns.query, ns.max_iter, not ns.no_extend, ns.box, ns.steps,
                     ns.format, ns.emit_constraints, ns.pretty_strict)


def _load(path: str) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


def _systems(report) -> list:
    out = []
    for rnd in report.rounds:
        for k, (system, outcome) in enumerate(rnd.attempts, 1):
            out.append((rnd.number, k, system, outcome))
    return out


def _outcome_text(outcome, ps: bool) -> str:
    name = type(outcome).__name__
    if hasattr(outcome, "assignment"):
        return f"{name} " + ", ".join(f"{s}={v}" for s, v in outcome.assignment.items())
    if hasattr(outcome, "condition"):
        return f"{name} {outcome.predicate}: {lincon.render(outcome.condition, ps)}"
    return name


def run(cfg: RunConfig, out) -> int:
    prog = _load(cfg.path)
    ps = cfg.pretty_strict
    if cfg.command == "adorn":
        pa = first_round(prog, cfg.query, cfg.extend)
        out.write(render_program(pa.with_bridges()))
        return EXIT_OK

    q = target(prog, cfg.query)
    report = infer(prog, q, InferConfig(cfg.max_iter, cfg.extend))

    if cfg.command == "analyze":
        if cfg.fmt == "json":
            doc = report.to_json(ps)
            if cfg.emit_constraints:
                doc["systems"] = [{"round": r, "attempt": k, "constraints": s.render().splitlines(),
                                   "outcome": _outcome_text(o, ps)} for r, k, s, o in _systems(report)]
            out.write(json.dumps(doc, indent=2) + "\n")
        else:
            out.write(report.text(ps) + "\n")
            if report.limit_hit:
                out.write("(iteration limit reached)\n")
            if cfg.emit_constraints:
                for r, k, s, o in _systems(report):
                    out.write(f"% round {r}, attempt {k}\n{s.render()}\n")
        return EXIT_OK

    if cfg.command == "explain":
        for rnd in report.rounds:
            out.write(f"round {rnd.number}, c = {lincon.render(rnd.condition, ps)}, {rnd.program_size} clauses\n")
            for p, conds in rnd.adornments.items():
                out.write(f"  adornments of {p}:\n")
                for a in conds:
                    out.write(f"    {lincon.render(a, ps)}\n")
            for st in rnd.statuses:
                out.write(f"  {lincon.render(st.adornment, ps)}: {st.status}\n")
            for k, (system, outcome) in enumerate(rnd.attempts, 1):
                out.write(f"  attempt {k}: {len(system.obligations)} obligations -> {_outcome_text(outcome, ps)}\n")
                for line in system.render().splitlines():
                    out.write(f"    {line}\n")
        out.write(report.text(ps) + "\n")
        return EXIT_OK

    # check
    pm = integer_positions(prog)
    positions = sorted(pm.get(q, ()))
    box = [cfg.box] * len(positions)
    val = validate_condition(prog, q, report.condition, box, cfg.steps, positions)
    pa = adorned_with(prog, q, report.rounds[-1].adornments)
    queries = [box_query(q, pt, positions) for pt in box_points(box)]
    sem = compare_semantics(prog, pa.with_bridges(), queries, min(cfg.steps, 10_000))
    doc = {
        "query": str(q),
        "condition": lincon.render(report.condition, ps),
        "validated_points": val.checked,
        "violations": [list(v) for v in val.violations],
        "semantics_queries": sem.checked,
        "semantics_mismatches": [str(m) for m in sem.mismatches],
    }
    if cfg.fmt == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(report.text(ps) + "\n")
        out.write(f"validation: {val.checked} points, {len(val.violations)} violations\n")
        for v in val.violations[:10]:
            out.write(f"  does not terminate within {cfg.steps} steps: {q.name}{tuple(v)}\n")
        out.write(f"semantics: {sem.checked} queries, {len(sem.mismatches)} mismatches\n")
        for m in sem.mismatches[:10]:
            out.write(f"  {m}\n")
    return EXIT_OK if val.ok and sem.ok else EXIT_CHECK


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = _config(ns)
        return run(cfg, sys.stdout)
    except ParseError as e:
        print(f"{ns.file}:{e.line}:{e.col}: error: {e.msg}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, NoTarget, ScopeError, PositionConflict, ValueError) as e:
        print(f"{ns.file}: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except lincon.CapacityError as e:
        print(f"{ns.file}: capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
