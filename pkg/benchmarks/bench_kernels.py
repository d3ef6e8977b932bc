"""Compare the compiled and pure-numpy solver kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times the three cooperative solvers on a fixed set of core-family moment
operators and checks both backends return the same costs.
"""
import argparse
import time

import numpy as np

from coopest import _pykernels
from coopest.cooperative import CoopConfig, cooperative_solve, exact_alternating_solve, fixed_point_solve
from coopest.estimation import family_moments
from coopest.quantum import CoreUnitaryTarget, ProbeState, core_entangling_family

try:
    from coopest import _ckernels
except ImportError:
    _ckernels = None


def instances(n, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        sx, sy, sz = np.sort(rng.uniform(0, np.pi / 2, 3))[::-1]
        f = core_entangling_family(CoreUnitaryTarget("s_x", (sy, sz)))
        out.append(family_moments(f, ProbeState(rng.uniform(), rng.uniform(0, 2 * np.pi))))
    return out


def timed(fn, ms, backend, repeat):
    best, costs = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        costs = [fn(m, (2, 2), CoopConfig(restarts=8), backend=backend).cost for m in ms]
        best = min(best, time.perf_counter() - t0)
    return best / len(ms), np.array(costs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    ms = instances(args.instances)
    backends = [_pykernels] + ([_ckernels] if _ckernels else [])
    print(f"{'solver':<22}" + "".join(f"{k.NAME:>14}" for k in backends) + f"{'speedup':>10}{'max |dcost|':>14}")
    for name, fn in (("fixed_point", fixed_point_solve), ("exact_alternating", exact_alternating_solve),
                     ("cooperative (8 starts)", cooperative_solve)):
        res = [timed(fn, ms, k, args.repeat) for k in backends]
        line = f"{name:<22}" + "".join(f"{t * 1e3:>11.3f} ms" for t, _ in res)
        if len(res) == 2:
            line += f"{res[0][0] / res[1][0]:>9.1f}x{np.abs(res[0][1] - res[1][1]).max():>14.2e}"
        print(line)


if __name__ == "__main__":
    main()
