"""Time the compiled pairwise backend against the numpy fallback.

The O(N^2) velocity/divergence sums are the hot path of every run; this
script times one call of each backend on representative workloads and
prints a small table.  Useful for checking that the compiled path is
worth having on a given machine (set AGGBLOB_NUMBA=0 to force the
fallback package-wide).
"""

import argparse
import sys
import time

import numpy as np

from aggblob import (
    Kernel,
    PolyBump,
    PowerLawTerm,
    TableConfig,
    build,
    builtin,
    discretize,
    newtonian,
    normalized,
)
from aggblob.pairwise import blob_velocity_div, particle_velocity


def _best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads(h_1d, h_2d):
    out = []
    for h in h_1d:
        grid = discretize(PolyBump(p=20.0), h, 1)
        reg = build(newtonian(1), builtin("psi4_1d"), h**0.9)
        out.append(("blob 1d newtonian", grid, reg))
    ker2 = Kernel((PowerLawTerm(4.0, 1.0), PowerLawTerm(1.5, -1.0)), 2)
    for h in h_2d:
        grid = discretize(normalized(PolyBump(p=2.0), 2), h, 2)
        reg = build(ker2, builtin("psi4_2d"), h**0.9,
                    table=TableConfig(2.5, 2000))
        out.append(("blob 2d tabulated", grid, reg))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=7,
                    help="timing repeats per cell, best-of (default 7)")
    ap.add_argument("--h1", default="0.01,0.0025",
                    help="comma-separated 1d spacings (default 0.01,0.0025)")
    ap.add_argument("--h2", default="0.11,0.055",
                    help="comma-separated 2d spacings (default 0.11,0.055)")
    args = ap.parse_args(argv)

    h_1d = [float(v) for v in args.h1.split(",") if v]
    h_2d = [float(v) for v in args.h2.split(",") if v]

    rows = []
    for label, grid, reg in _workloads(h_1d, h_2d):
        pos, w = grid.positions, grid.weights
        # first numba call pays the JIT compile; warm both paths before timing
        blob_velocity_div(pos, w, reg, backend="numba")
        blob_velocity_div(pos, w, reg, backend="numpy")
        t_nb = _best_of(lambda: blob_velocity_div(pos, w, reg, backend="numba"),
                        args.repeats)
        t_np = _best_of(lambda: blob_velocity_div(pos, w, reg, backend="numpy"),
                        args.repeats)
        rows.append((label, grid.n, t_nb, t_np))

    grid = discretize(PolyBump(p=20.0), min(h_1d), 1)
    kernel = newtonian(1)
    particle_velocity(grid.positions, grid.weights, kernel, backend="numba")
    particle_velocity(grid.positions, grid.weights, kernel, backend="numpy")
    t_nb = _best_of(lambda: particle_velocity(grid.positions, grid.weights,
                                              kernel, backend="numba"),
                    args.repeats)
    t_np = _best_of(lambda: particle_velocity(grid.positions, grid.weights,
                                              kernel, backend="numpy"),
                    args.repeats)
    rows.append(("particle 1d newtonian", grid.n, t_nb, t_np))

    print(f"{'workload':<22} {'N':>6} {'numba ms':>10} {'numpy ms':>10} "
          f"{'speedup':>8}")
    for label, n, t_nb, t_np in rows:
        print(f"{label:<22} {n:>6} {t_nb * 1e3:>10.3f} {t_np * 1e3:>10.3f} "
              f"{t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
