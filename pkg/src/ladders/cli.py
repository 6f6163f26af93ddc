"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import sys

import numpy as np

from . import se3
from .exceptions import InvalidInput, NumericalFailure
from .lab import ExperimentSpec, emit_report, format_report, run_experiment
from .ladders import LadderConfig, transport, transport_reference

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
ZERO_TOL = 1e-12


def _geometric_grid(n_min, n_max):
    if n_min < 2 or n_max < n_min:
        raise InvalidInput("need 2 <= n-min <= n-max")
    grid = []
    n = n_min
    while n <= n_max:
        grid.append(n)
        n *= 2
    return grid


def _add_common(p):
    p.add_argument("--manifold", choices=("sphere", "spd", "se3"), default="sphere")
    p.add_argument("--scheme", choices=("schild", "pole", "averaged", "fanning"), default="schild")
    p.add_argument("--backend", choices=("closed", "infinitesimal"), default="closed")
    p.add_argument("--alpha", type=float, default=None, help="scaling exponent (scheme default if omitted)")
    p.add_argument("--beta", type=float, default=1.0, help="SE(3) anisotropy")


def build_parser():
    parser = argparse.ArgumentParser(prog="ladders", description="Ladder schemes for parallel transport.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="sweep n and fit the convergence rate")
    _add_common(p)
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=320)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("transport", help="single transport run")
    _add_common(p)
    p.add_argument("--n", type=int, default=20)

    p = sub.add_parser("curvature", help="print SE(3) curvature tables")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--nabla", action="store_true", help="also print the covariant derivative of R")
    return parser


def _cmd_converge(args):
    spec = ExperimentSpec(args.manifold, args.scheme, args.alpha, args.backend, args.beta,
                          _geometric_grid(args.n_min, args.n_max), seed=args.seed)
    report = run_experiment(spec)
    if args.out == "-":
        sys.stdout.write(format_report(report, args.format))
    else:
        emit_report(report, args.out, args.format)
        f = report.fit
        print(f"wrote {len(report.rows)} rows to {args.out}; slope {f.slope:.4f} (r^2 {f.r_squared:.5f}), "
              f"longitudinal coefficient {f.long_coef:.6g}", file=sys.stderr)
    for n, msg in report.failures:
        print(f"n={n}: {msg}", file=sys.stderr)
    return EXIT_NUMERICAL if report.failures else EXIT_OK


def _cmd_transport(args):
    spec = ExperimentSpec(args.manifold, args.scheme, args.alpha, args.backend, args.beta, [max(args.n, 2)])
    M, x, w, v = spec.inputs()
    res = transport(M, x, w, v, LadderConfig(spec.scheme, args.n, spec.alpha, spec.backend))
    ref = transport_reference(M, x, w, v, n_max=args.n)
    np.set_printoptions(precision=12, suppress=False)
    print("endpoint:")
    print(res.endpoint)
    print("transported vector:")
    print(res.transported.vec)
    print("reference:")
    print(ref.vec)
    print(f"error: {M.norm(res.endpoint, res.transported.vec - M.project(res.endpoint, ref.vec)):.6e}")
    print(f"rk calls: {res.rk_calls}")
    return EXIT_OK


def _cmd_curvature(args):
    beta = args.beta
    R = se3.curvature_tensor(beta)
    N = se3.nabla_curvature_tensor(beta)
    tau = float(np.sqrt(beta) + 1.0 / np.sqrt(beta))
    print(f"beta = {beta!r}, tau = {tau!r}")
    print("nonzero R(e_i, e_j)e_k (1-based, i < j):")
    for i in range(6):
        for j in range(i + 1, 6):
            for k in range(6):
                vec = R[i, j, k]
                if np.max(np.abs(vec)) > ZERO_TOL:
                    terms = " ".join(f"{c:+.6g} e{m + 1}" for m, c in enumerate(vec) if abs(c) > ZERO_TOL)
                    print(f"  R(e{i + 1}, e{j + 1})e{k + 1} = {terms}")
    nmax = float(np.max(np.abs(N)))
    if args.nabla:
        print("nonzero (nabla_{e_i} R)(e_j, e_k)e_l (1-based, j < k):")
        for i in range(6):
            for j in range(6):
                for k in range(j + 1, 6):
                    for l in range(6):
                        vec = N[i, j, k, l]
                        if np.max(np.abs(vec)) > ZERO_TOL:
                            terms = " ".join(f"{c:+.6g} e{m + 1}" for m, c in enumerate(vec) if abs(c) > ZERO_TOL)
                            print(f"  (nabla_e{i + 1} R)(e{j + 1}, e{k + 1})e{l + 1} = {terms}")
    # both readings of the witness index tuple are reported
    for label, vec in se3.witness_values(beta).items():
        print(f"witness {label} = {' '.join(f'{c:+.17g}' for c in vec)}")
    print(f"expected e6 coefficient -tau/(4 sqrt 2)(1 - tau^2/4) = {float(se3.witness_expected(beta))!r}")
    print(f"max |nabla R| = {nmax:.3e}")
    symmetric = nmax <= ZERO_TOL
    consistent = symmetric == (beta == 1.0)
    print("locally symmetric" if symmetric else "not locally symmetric",
          "(consistent with beta)" if consistent else "(INCONSISTENT with beta)")
    return EXIT_OK if consistent else EXIT_NUMERICAL


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "converge":
            return _cmd_converge(args)
        if args.command == "transport":
            return _cmd_transport(args)
        return _cmd_curvature(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalFailure as exc:
        rung = f" (rung {exc.rung})" if exc.rung is not None else ""
        print(f"numerical failure{rung}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
