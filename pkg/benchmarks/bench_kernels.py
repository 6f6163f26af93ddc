"""Time the compiled RK4 kernels against their numpy fallbacks.

Reports microseconds per geodesic step for each manifold and, with
``--ladder``, the wall time of a full infinitesimal pole ladder run in a
fresh interpreter with and without ``LADDERS_DISABLE_NUMBA``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ladders import SE3, SPD, Sphere, kernels
from ladders._accel import HAVE_NUMBA

LADDER_SNIPPET = """
import time
import numpy as np
from ladders import SE3
from ladders.ladders import transport
M = SE3(2.0)
transport(M, np.eye(4), np.eye(6)[2], np.eye(6)[3], scheme="pole", n=2, backend="infinitesimal")  # warm-up
t0 = time.perf_counter()
transport(M, np.eye(4), np.eye(6)[2], np.eye(6)[3], scheme="pole", n={n}, backend="infinitesimal")
print(time.perf_counter() - t0)
"""


def states(seed):
    rng = np.random.default_rng(seed)
    S, G = SPD(), SE3(2.0)
    x = Sphere().random_point(rng)
    P = S.random_point(rng)
    return {
        "sphere": (np.concatenate((x, Sphere().random_tangent(rng, x))), ()),
        "spd": (S.pack(P, S.random_tangent(rng, P)), ()),
        "se3": (G.pack(G.random_point(rng), rng.standard_normal(6)), (G.C, G.basis)),
    }


def per_step_us(fn, y, extra, repeat):
    fn(y, 0.01, *extra)  # compile / warm up
    t = min(timeit.repeat(lambda: fn(y, 0.01, *extra), number=repeat, repeat=5))
    return 1e6 * t / repeat


def ladder_seconds(n, disable):
    env = dict(os.environ, LADDERS_DISABLE_NUMBA="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", LADDER_SNIPPET.format(n=n)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=2000, help="kernel calls per timing sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ladder", action="store_true", help="also time a full ladder run in subprocesses")
    p.add_argument("--n", type=int, default=160, help="rungs for the ladder timing")
    args = p.parse_args(argv)

    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<8} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for name, (y, extra) in states(args.seed).items():
        t_np = per_step_us(getattr(kernels, f"rk4_{name}_numpy"), y, extra, args.repeat)
        if HAVE_NUMBA:
            t_nb = per_step_us(getattr(kernels, f"rk4_{name}_numba"), y, extra, args.repeat)
            print(f"{name:<8} {t_np:>10.2f} {t_nb:>10.2f} {t_np / t_nb:>7.1f}x")
        else:
            print(f"{name:<8} {t_np:>10.2f} {'n/a':>10} {'':>8}")
    if args.ladder:
        t_np = ladder_seconds(args.n, True)
        t_nb = ladder_seconds(args.n, False)
        print(f"pole ladder, SE(3) beta=2, n={args.n}: numpy {t_np:.3f} s, numba {t_nb:.3f} s "
              f"({t_np / t_nb:.1f}x)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
