"""Analyse every corpus program and validate each inferred condition with the oracle.

    python scripts/run_corpus.py [--box 12] [--steps 100000]
"""
import argparse
import time
from pathlib import Path

from numloop import lincon
from numloop.driver import infer
from numloop.oracle import validate_condition
from numloop.prep import integer_positions
from numloop.syntax import parse_program

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--box", type=int, default=12, help="validate over [-box, box]^k")
    ap.add_argument("--steps", type=int, default=100_000)
    ns = ap.parse_args()
    for path in sorted(CORPUS.glob("*.pl")):
        prog = parse_program(path.read_text())
        t = time.perf_counter()
        r = infer(prog)
        dt = time.perf_counter() - t
        positions = sorted(integer_positions(prog).get(r.query, ()))
        v = validate_condition(prog, r.query, r.condition, [(-ns.box, ns.box)] * len(positions), ns.steps,
                               positions)
        states = ", ".join(f"{lincon.render(s.adornment)}: {s.status}" for s in r.adornments)
        print(f"{path.stem:10s} {r.text()}")
        print(f"{'':10s} rounds {r.iterations}{' (limit)' if r.limit_hit else ''}, {dt:.2f}s, "
              f"validated {v.checked} points, {len(v.violations)} violations")
        print(f"{'':10s} {states}")


if __name__ == "__main__":
    main()
