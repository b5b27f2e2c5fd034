"""Semantics preservation on random programs: P against its adorned program with bridges.

    python scripts/random_preservation.py [--n 200] [--seed 0] [--box 10] [--show-slowest 5]
"""
import argparse
import random
import time

from numloop.driver import first_round
from numloop.oracle import box_points, compare_semantics, point_query
from numloop.randprog import GenConfig, random_program
from numloop.syntax import render_program


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--box", type=int, default=10)
    ap.add_argument("--steps", type=int, default=10_000)
    ap.add_argument("--max-clauses", type=int, default=4)
    ap.add_argument("--show-slowest", type=int, default=5)
    ns = ap.parse_args()
    rng = random.Random(ns.seed)
    cfg = GenConfig(max_clauses=ns.max_clauses)
    t0 = time.perf_counter()
    timings, queries, bad = [], 0, 0
    for i in range(ns.n):
        prog = random_program(rng, cfg)
        q = prog.analyze_targets()[0]
        t = time.perf_counter()
        pag = first_round(prog, q).with_bridges()
        pts = [point_query(q, pt) for pt in box_points([(-ns.box, ns.box)] * q.arity)]
        rep = compare_semantics(prog, pag, pts, ns.steps)
        timings.append((time.perf_counter() - t, i, prog))
        queries += rep.checked
        if not rep.ok:
            bad += 1
            print(f"program {i}: {len(rep.mismatches)} mismatches, e.g. {rep.mismatches[0]}")
            print(render_program(prog))
    print(f"{ns.n} programs, {queries} queries, {bad} programs with mismatches, "
          f"{time.perf_counter() - t0:.1f}s")
    for dt, i, prog in sorted(timings, key=lambda x: x[0])[-ns.show_slowest:]:
        print(f"-- program {i}, {dt:.2f}s\n{render_program(prog)}")


if __name__ == "__main__":
    main()
