"""Time the compiled kernels against the pure Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--engine]

Kernel timings run in-process.  With --engine, one full refinement run is
timed under each backend in a subprocess (PTFORCE_PURE selects the fallback).
"""
import argparse
import os
import random
import subprocess
import sys
import timeit

from ptforce import _kernels_py as py

try:
    from ptforce import _ckernels as cy
except ImportError:
    cy = None


def stem_sets(r: random.Random, count: int, width: int, depth: int):
    out = []
    for _ in range(count):
        xs = ["".join(r.choice("01") for _ in range(r.randint(1, depth))) for _ in range(width)]
        out.append(py.canon(xs))
    return out


def cases(sets):
    pairs = list(zip(sets, sets[1:]))
    return {
        "canon": lambda k: [k.canon(list(a) + list(b)) for a, b in pairs],
        "meet": lambda k: [k.meet(a, b) for a, b in pairs],
        "diff": lambda k: [k.diff(a, b) for a, b in pairs],
        "disjoint": lambda k: [k.disjoint(a, b) for a, b in pairs],
        "truncate": lambda k: [k.truncate(a, 4) for a in sets],
        "level_nodes": lambda k: [k.level_nodes(a, 8) for a in sets],
        "slice_count": lambda k: [k.slice_count(a, 12) for a in sets],
    }


ENGINE = """
import random, time
from ptforce import kernels
from ptforce.randgen import random_multiforcing
from ptforce.refine import generic_refine, mandatory_tasks
t = time.perf_counter()
for s in range(5):
    pi = random_multiforcing(random.Random(s))
    generic_refine(pi, mandatory_tasks(pi, depth=8, k_max=3), seed=s)
print(kernels.BACKEND, round(time.perf_counter() - t, 3))
"""


def engine_runs():
    for pure in ("1", ""):
        env = dict(os.environ, PTFORCE_PURE=pure)
        res = subprocess.run([sys.executable, "-c", ENGINE], env=env, capture_output=True,
                             text=True, check=True)
        name, secs = res.stdout.split()
        print(f"engine x5 [{name}]: {secs} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sets", type=int, default=400)
    ap.add_argument("--engine", action="store_true", help="also time full engine runs")
    args = ap.parse_args()
    sets = stem_sets(random.Random(0), args.sets, 24, 10)
    print(f"{'kernel':<12} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for label, fn in cases(sets).items():
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat)) * 1e3
        if cy is None:
            print(f"{label:<12} {tp:>10.2f} {'-':>10} {'-':>8}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:<12} {tp:>10.2f} {tc:>10.2f} {tp / tc:>7.1f}x")
    if args.engine:
        engine_runs()


if __name__ == "__main__":
    main()
