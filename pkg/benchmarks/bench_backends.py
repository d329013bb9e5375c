"""Compare the gmpy2 rational backend with the pure-Python fallback.

Each workload runs in a fresh interpreter so the backend choice made at
import time is honoured:

    python benchmarks/bench_backends.py [--repeat N]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOADS = {
    "wp monty_switch x200": """
        post = expectation_of(parse_expr("[G = P]", sp), sp)
        for _ in range(200):
            _cache.clear()
            wp(prog, post)
    """,
    "geometric loop, 30 iterations x50": """
        sp, prog = load("geometric.pgcl")
        for _ in range(50):
            wp(prog, Expectation.one(sp))
    """,
    "health check monty_switch": """
        check_well_def(prog, sp, trials=50)
    """,
    "oracle, 40 random programs": """
        sys.path.insert(0, os.path.join(ROOT, "tests"))
        from randprog import programs
        for space, p in programs(40, seed=3, stuck=False):
            posts = [Expectation.indicator(space, s) for s in space.states]
            for q in posts:
                oracle_wp_all(p, q)
    """,
}

PRELUDE = """
import os, sys, time
from importlib.resources import files
from pgcl import *
from pgcl.engine import _cache
from pgcl.forward import oracle_wp_all
ROOT = {root!r}
def load(name):
    return parse(files("pgcl.programs").joinpath(name).read_text())
sp, prog = load("monty_switch.pgcl")
t0 = time.perf_counter()
"""


def run(body: str, pure: bool, root: str) -> float:
    code = PRELUDE.format(root=root) + textwrap.dedent(body) + "\nprint(time.perf_counter() - t0)\n"
    env = dict(os.environ)
    env.pop("PGCL_PURE_PYTHON", None)
    if pure:
        env["PGCL_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def backend_name(pure: bool) -> str:
    env = dict(os.environ)
    env.pop("PGCL_PURE_PYTHON", None)
    if pure:
        env["PGCL_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", "import pgcl; print(pgcl.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    fast, slow = backend_name(False), backend_name(True)
    rows = []
    for name, body in WORKLOADS.items():
        t_fast = min(run(body, False, root) for _ in range(args.repeat))
        t_slow = min(run(body, True, root) for _ in range(args.repeat))
        rows.append({"workload": name, fast: t_fast, slow: t_slow, "speedup": t_slow / t_fast})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'workload':<36} {fast:>10} {slow:>10} {'speedup':>8}")
    for r in rows:
        print(f"{r['workload']:<36} {r[fast]:>9.3f}s {r[slow]:>9.3f}s {r['speedup']:>7.1f}x")
    if fast == slow:
        print("(gmpy2 not importable: both columns use the fallback)")


if __name__ == "__main__":
    main()
