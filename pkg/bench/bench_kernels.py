"""Time the numba kernels against the numpy fallback.

Each backend runs in its own interpreter because the choice is made at
import time from ``DDSIM_NUMBA``.  Usage::

    python3 bench/bench_kernels.py [--repeat 20] [--json out.json]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from ddsim import _accel
from ddsim.groups import efficient_group
from ddsim.model import heisenberg_chain
from ddsim.schedule import parse_protocol
from ddsim.engine import MonteCarloConfig, monte_carlo

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
out = {"numba": _accel.USE_NUMBA}

def best(fn, number):
    fn()  # warm-up (numba compiles here)
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number

for n in (6, 8, 10):
    d = 1 << n
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    x, z = 0b1010101010 & (d - 1), 0b0110011001 & (d - 1)
    out[f"conj_dense n={n}"] = best(lambda: _accel.conj_dense(m, x, z), 20)
    out[f"left_mul_dense n={n}"] = best(lambda: _accel.left_mul_dense(m, x, z), 20)
    out[f"trace_pauli_dag n={n}"] = best(lambda: _accel.trace_pauli_dag(m, x, z), 200)

k = 400
xa, za = rng.integers(0, 1 << 12, k), rng.integers(0, 1 << 12, k)
ca = rng.normal(size=k) + 0j
out["mul_terms 400x400"] = best(lambda: _accel.mul_terms(xa, za, ca, xa, za, ca), 3)
xs = rng.integers(0, 1 << 8, 60).astype(np.uint64)
zs = rng.integers(0, 1 << 8, 60).astype(np.uint64)
cs = rng.normal(size=60) + 0j
out["pauli_dense n=8, 60 terms"] = best(lambda: _accel.pauli_dense(xs, zs, cs, 8), 5)

g = efficient_group("ZY", 8)
h = heisenberg_chain(8)
cfg = MonteCarloConfig(h, g, parse_protocol("SRPD"), 0.1, 160, n_realizations=4, seed=1)
out["monte_carlo SRPD N=8 4x160 slots"] = best(lambda: monte_carlo(cfg), 1)
print(json.dumps(out))
"""


def run_backend(flag: str, repeat: int) -> dict:
    env = dict(os.environ, DDSIM_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write raw timings here")
    args = ap.parse_args(argv)
    fast = run_backend("1", args.repeat)
    slow = run_backend("0", args.repeat)
    if not fast.pop("numba"):
        print("numba unavailable: both columns use the numpy path")
    slow.pop("numba")
    width = max(map(len, fast))
    print(f"{'kernel':<{width}}  {'numba [ms]':>11}  {'numpy [ms]':>11}  {'speedup':>8}")
    for key in fast:
        a, b = fast[key] * 1e3, slow[key] * 1e3
        print(f"{key:<{width}}  {a:11.4f}  {b:11.4f}  {b / a:8.2f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"numba": fast, "numpy": slow}, fh, indent=2)


if __name__ == "__main__":
    main()
