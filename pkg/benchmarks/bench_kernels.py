"""Time the compiled kernels against the pure-NumPy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeats 5] [--scale 1.0]

Each kernel is called on identical inputs through both backends; the table
reports the best wall time of ``--repeats`` calls and the speed-up. A final
row times a full centroid selection on a dense instance under each backend
(the fallback is forced with ``SPATIAL_GREEDY_PURE_PYTHON=1`` in a child
process so the import-time selection is exercised too).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from spatial_greedy import _pykernels

try:
    from spatial_greedy import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None


def cases(scale, rng):
    m, n = int(2000 * scale), int(1000 * scale)
    X, Y = rng.uniform(0, 40, (m, 2)), rng.uniform(0, 40, (n, 2))
    w = rng.standard_normal(n)
    V, W = rng.standard_normal((50, m)), rng.standard_normal((50, n))
    v = rng.standard_normal(m)
    pts = rng.uniform(0, 40, (int(1000 * scale), 2))
    adj = np.linalg.norm(pts[:, None] - pts[None], axis=-1) <= 11.78
    np.fill_diagonal(adj, False)

    def downdate(mod):
        D = np.ones((m, n))
        rowsq = np.empty(m)
        return lambda: mod.rank1_downdate_rowsq(D, v, w, rowsq)

    def residual(mod):
        Phi = mod.se_cross(X, Y, 165.6, 8.33)
        rowsq = np.empty(m)
        return lambda: mod.residual_rowsq(Phi, V, W, rowsq)

    return {
        f"se_cross {m}x{n}": lambda mod: (lambda: mod.se_cross(X, Y, 165.6, 8.33)),
        f"se_cross_matvec {m}x{n}": lambda mod: (lambda: mod.se_cross_matvec(X, Y, 165.6, 8.33, w)),
        f"rank1_downdate_rowsq {m}x{n}": downdate,
        f"residual_rowsq k=50 {m}x{n}": residual,
        f"greedy_cliques n={pts.shape[0]}": lambda mod: (lambda: mod.greedy_cliques(adj)),
    }


SELECTION_SNIPPET = """
import time
from spatial_greedy import Box, harness, kernels
from spatial_greedy.selection import centroid_greedy
inst = harness.generate_instance(Box.square(120.0), 1000, 200, harness.DEFAULT_MODEL, seed=0)
centroid_greedy(inst)
best = min(centroid_greedy(inst).elapsed for _ in range({repeats}))
print(kernels.BACKEND, best)
"""


def selection_time(pure: bool, repeats: int):
    env = dict(os.environ, SPATIAL_GREEDY_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SELECTION_SNIPPET.format(repeats=repeats)],
                         env=env, capture_output=True, text=True, check=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--scale", type=float, default=1.0)
    args = p.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} {'cython [ms]':>12s} {'numpy [ms]':>12s} {'speed-up':>9s}")
    for name, make in cases(args.scale, rng).items():
        tc = min(timeit.repeat(make(_ckernels), number=1, repeat=args.repeats))
        tp = min(timeit.repeat(make(_pykernels), number=1, repeat=args.repeats))
        print(f"{name:38s} {tc * 1e3:12.2f} {tp * 1e3:12.2f} {tp / tc:9.2f}")

    (bc, tc), (bp, tp) = selection_time(False, args.repeats), selection_time(True, args.repeats)
    assert (bc, bp) == ("cython", "python"), (bc, bp)
    print(f"{'centroid_greedy med/dense':38s} {tc * 1e3:12.2f} {tp * 1e3:12.2f} {tp / tc:9.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
