"""Compare the compiled kernel path against the plain-numpy fallback.

The path is chosen at import time from the STLFUNNEL_NO_NUMBA
environment variable, so the fallback numbers come from a child
process started with the flag set.  Run without arguments to get the
side-by-side table:

    python benchmarks/bench_kernels.py
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from stlfunnel import kernels
from stlfunnel.parsing import parse_psi
from stlfunnel.plants import omni_robot_team
from stlfunnel.robustness import compile_leaf_table

PSI = (
    "ball(0,1;20,30;10) and ball(3,4;40,60;10) and ball(6,7;60,30;10) "
    "and join(0,1;6,7;30) and ball(2;45;5) and ball(5;45;5) and ball(8;45;5)"
)
BATCH = 100_000
POINTWISE = 20_000


def _workload():
    plant = omni_robot_team(3, input_gain=100.0)
    table = compile_leaf_table(parse_psi(PSI))
    rng = np.random.default_rng(0)
    X = np.empty((BATCH, 9))
    X[:, 0::3] = rng.uniform(0.0, 90.0, (BATCH, 3))
    X[:, 1::3] = rng.uniform(0.0, 90.0, (BATCH, 3))
    X[:, 2::3] = rng.uniform(0.0, 360.0, (BATCH, 3))
    T = rng.uniform(0.0, 40.0, BATCH)
    return plant, table, X, T


def run_bench() -> dict:
    plant, table, X, T = _workload()
    args = (1.0, 1.8, 2000.0, 2000.0, 0.0,
            plant.kernel_kind, plant.kernel_gain, plant.kernel_gbase)

    U = np.empty((BATCH, 9))
    XI = np.empty(BATCH)
    kernels.u_xi_batch(*table.arrays(), X[:128], T[:128], *args, U[:128], XI[:128])

    start = time.perf_counter()
    kernels.u_xi_batch(*table.arrays(), X, T, *args, U, XI)
    batch_s = time.perf_counter() - start

    u = np.empty(9)
    kernels.u_xi_eval(*table.arrays(), X[0], float(T[0]), *args, u)
    start = time.perf_counter()
    for p in range(POINTWISE):
        kernels.u_xi_eval(*table.arrays(), X[p], float(T[p]), *args, u)
    point_s = time.perf_counter() - start

    return {
        "numba": kernels.USING_NUMBA,
        "batch_evals_per_s": BATCH / batch_s,
        "pointwise_evals_per_s": POINTWISE / point_s,
    }


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    opts = ap.parse_args()

    result = run_bench()
    if opts.inner:
        print(json.dumps(result))
        return 0

    rows = [result]
    if result["numba"]:
        env = dict(os.environ, STLFUNNEL_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner"],
            capture_output=True, text=True, env=env, check=True,
        )
        rows.append(json.loads(out.stdout))
    else:
        print("note: compiled path unavailable; showing the fallback only")

    print(f"{'path':<10} {'batch evals/s':>15} {'pointwise evals/s':>19}")
    for row in rows:
        name = "compiled" if row["numba"] else "numpy"
        print(f"{name:<10} {row['batch_evals_per_s']:>15,.0f} "
              f"{row['pointwise_evals_per_s']:>19,.0f}")
    if len(rows) == 2:
        print(f"speedup: batch x{rows[0]['batch_evals_per_s'] / rows[1]['batch_evals_per_s']:.1f}, "
              f"pointwise x{rows[0]['pointwise_evals_per_s'] / rows[1]['pointwise_evals_per_s']:.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
