"""Time the numpy and compiled SPD kernels side by side.

    python benchmarks/bench_kernels.py [--sizes 2 4 8 16] [--repeat 2000] [--rogd]

``--rogd`` also times a short end-to-end run under each backend, each in a
fresh interpreter so the import-time selection is honoured.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from horoopt import _pykernels as py
from horoopt.spd import random_spd, random_symmetric

try:
    from horoopt import _ckernels as ck
except ImportError:
    ck = None

FLOOR = 1e-12

ROGD_SNIPPET = """
import time, numpy as np, horoopt
from horoopt.harness import ExperimentConfig, run_experiment
cfg = ExperimentConfig(kind="frechet", n={n}, T={T}, etas=(1.0,), seed=0, plot=False)
t0 = time.perf_counter(); run_experiment(cfg)
print(horoopt.BACKEND, time.perf_counter() - t0)
"""


def cases(K, X, Y, U, V):
    return {
        "sym_fn(sqrt)": lambda: K.sym_fn(X, 0, 0.0, FLOOR),
        "exp_map": lambda: K.exp_map(X, U, FLOOR),
        "log_map": lambda: K.log_map(X, Y, FLOOR),
        "dist": lambda: K.dist(X, Y, FLOOR),
        "geodesic": lambda: K.geodesic(X, Y, 0.3, FLOOR),
        "inner": lambda: K.inner(X, U, V),
    }


def per_call_us(fn, repeat):
    return min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat * 1e6


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>4}{'python us':>12}{'cython us':>12}{'speedup':>9}")
    for n in sizes:
        X, Y = random_spd(n, rng), random_spd(n, rng)
        U, V = random_symmetric(n, rng), random_symmetric(n, rng)
        U *= 1.0 / np.sqrt(py.inner(X, U, U))
        pc = cases(py, X, Y, U, V)
        cc = cases(ck, X, Y, U, V) if ck else {}
        for name, fn in pc.items():
            tp = per_call_us(fn, repeat)
            if name in cc:
                tc = per_call_us(cc[name], repeat)
                print(f"{name:<14}{n:>4}{tp:>12.2f}{tc:>12.2f}{tp / tc:>8.2f}x")
            else:
                print(f"{name:<14}{n:>4}{tp:>12.2f}{'n/a':>12}{'':>9}")


def bench_rogd(n, T):
    for backend in ("python", "cython"):
        env = dict(os.environ, HOROOPT_BACKEND=backend)
        proc = subprocess.run([sys.executable, "-c", ROGD_SNIPPET.format(n=n, T=T)],
                              env=env, capture_output=True, text=True)
        if proc.returncode:
            print(f"rogd {backend}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        name, secs = proc.stdout.split()
        print(f"rogd n={n} T={T} backend={name}: {float(secs):.3f} s")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--rogd", action="store_true")
    ap.add_argument("--rogd-n", type=int, default=8)
    ap.add_argument("--rogd-T", type=int, default=500)
    args = ap.parse_args(argv)
    if ck is None:
        print("compiled kernels not built; timing the numpy path only")
    bench_kernels(args.sizes, args.repeat)
    if args.rogd:
        bench_rogd(args.rogd_n, args.rogd_T)


if __name__ == "__main__":
    main()
