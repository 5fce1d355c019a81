"""Time the numba kernels against the numpy fallback.

Two parts:
  * kernel micro-benchmarks, both implementations called in-process
  * full optimizer runs, one subprocess per backend (SCCSA_DISABLE_NUMBA=1
    selects numpy), so the whole stack is measured as users see it

Usage: python benchmarks/compare_backends.py [--pop 30] [--dim 10] [--repeat 200] [--budget 30000]
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from sccsa import _kernels as K

KERNELS = ("sphere", "schwefel_2_22", "schwefel_1_2", "schwefel_2_21", "rosenbrock", "step", "quartic")

RUN_SNIPPET = """
import json, time
from sccsa import BACKEND, get_benchmark, run
out = {"backend": BACKEND}
for fid in ("f1", "f5", "f7"):
    p = get_benchmark(fid, %(dim)d)
    run(p, "sccsa", pop_size=%(pop)d, budget_fe=%(pop)d * 4, seed=0)  # warm up / compile
    t0 = time.perf_counter()
    for algo in ("sccsa", "csa", "sca"):
        run(p, algo, pop_size=%(pop)d, budget_fe=%(budget)d, seed=1)
    out[fid] = time.perf_counter() - t0
print(json.dumps(out))
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=repeat, repeat=5)) / repeat


def kernel_table(pop, dim, repeat):
    if not hasattr(K, "move_numba"):
        print("numba not importable; only the numpy path exists")
        return
    rng = np.random.default_rng(0)
    x = rng.uniform(-10, 10, (pop, dim))
    tgt = rng.uniform(-10, 10, (pop, dim))
    r1, r4, rf = np.full(pop, 1.5), rng.random(pop), rng.random(pop)
    r2, r3 = rng.uniform(0, 2 * np.pi, (pop, dim)), rng.uniform(0, 2, (pop, dim))
    print(f"kernel timings, population {pop} x {dim}, microseconds per call")
    print(f"{'kernel':<16}{'numpy':>10}{'numba':>10}{'speedup':>9}")
    for name in ("move",) + KERNELS:
        np_fn, nb_fn = getattr(K, name + "_numpy"), getattr(K, name + "_numba")
        if name == "move":
            args = (x, tgt, r1, r2, r3, r4, rf, 2.0, 0.3, 0.6, True)
        else:
            args = (x,)
        nb_fn(*args)  # compile outside the timer
        a = best_of(lambda: np_fn(*args), repeat) * 1e6
        b = best_of(lambda: nb_fn(*args), repeat) * 1e6
        print(f"{name:<16}{a:>10.2f}{b:>10.2f}{a / b:>8.1f}x")


def run_table(pop, dim, budget):
    code = RUN_SNIPPET % dict(pop=pop, dim=dim, budget=budget)
    results = []
    for disable in ("0", "1"):
        env = dict(os.environ, SCCSA_DISABLE_NUMBA=disable)
        proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        results.append(json.loads(proc.stdout))
    print(f"\nfull runs (sccsa+csa+sca), budget {budget}, seconds")
    print(f"{'function':<10}" + "".join(f"{r['backend']:>10}" for r in results))
    for fid in ("f1", "f5", "f7"):
        print(f"{fid:<10}" + "".join(f"{r[fid]:>10.3f}" for r in results))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pop", type=int, default=30)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--budget", type=int, default=30_000)
    args = ap.parse_args()
    kernel_table(args.pop, args.dim, args.repeat)
    run_table(args.pop, args.dim, args.budget)


if __name__ == "__main__":
    main()
