"""Time the hot kernels under both backends.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``MEPGRAPHENE_BACKEND``.  The first call of every case is a
warm-up (it includes numba compilation) and is reported separately.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 20000]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from mepgraphene import kernels
from mepgraphene.closure import Multipliers, multipliers_to_moments, solve_multipliers
from mepgraphene.oracle import oracle_moments

size, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
z = rng.uniform(-40.0, 120.0, size)
a = rng.uniform(-15.0, 120.0, size)
b = rng.uniform(0.0, 1.5, size) * np.maximum(np.abs(a), 1.0)
cells = min(size, 2000)
states = [multipliers_to_moments(Multipliers(float(x), [float(y), 0.0], 1.0))
          for x, y in zip(a[:cells], b[:cells])]
n = np.array([s.n for s in states]); u = np.array([s.speed for s in states])
e = np.array([s.e for s in states])
keep = u < 0.99
cases = {
    "phi_table": lambda: kernels.phi_table(z),
    "angular_table_batch": lambda: kernels.angular_table_batch(a, b),
    "newton_inverse": lambda: solve_multipliers(n[keep], u[keep], e[keep]),
    "oracle_moments": lambda: oracle_moments(Multipliers(12.0, [3.0, 4.0], 0.7)),
}
out = {"backend": kernels.BACKEND, "cases": {}}
for name, fn in cases.items():
    t0 = time.perf_counter(); fn(); first = time.perf_counter() - t0
    best = min((lambda t: (fn(), time.perf_counter() - t)[1])(time.perf_counter())
               for _ in range(repeat))
    out["cases"][name] = {"first_s": first, "best_s": best}
print(json.dumps(out))
"""


def run(backend, size, repeat):
    env = dict(os.environ, MEPGRAPHENE_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(size), str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=20000, help="batch length")
    p.add_argument("--repeat", type=int, default=5, help="timed repetitions (best kept)")
    args = p.parse_args(argv)
    results = {b: run(b, args.size, args.repeat) for b in ("numba", "numpy")}
    print(f"{'case':<22}{'numba best [ms]':>17}{'numpy best [ms]':>17}{'speed-up':>10}"
          f"{'numba first [ms]':>18}")
    for name in results["numba"]["cases"]:
        nb, npy = results["numba"]["cases"][name], results["numpy"]["cases"][name]
        print(f"{name:<22}{1e3 * nb['best_s']:>17.2f}{1e3 * npy['best_s']:>17.2f}"
              f"{npy['best_s'] / nb['best_s']:>10.1f}{1e3 * nb['first_s']:>18.1f}")
    if results["numba"]["backend"] != "numba":
        print("note: numba is not importable; both columns used the numpy backend")


if __name__ == "__main__":
    main()
