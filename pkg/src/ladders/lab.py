"""Convergence experiments: sweep n, measure errors against a reference
transport, fit rates, and read/write flat reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import TangentVector, check_same_base
from .exceptions import DegenerateFit, InvalidInput, InvalidSpec, LadderError
from .ladders import LadderConfig, normalize_backend, normalize_scheme, transport, transport_reference
from .se3 import SE3
from .spd import SPD
from .sphere import Sphere

MANIFOLDS = ("sphere", "spd", "se3")
DEFAULT_N_GRID = (5, 10, 20, 40, 80, 160, 320)
FIT_SKIP = 2  # smallest n values left out of the fits
CSV_FIELDS = (
    "scheme", "manifold", "beta", "alpha", "backend", "n",
    "abs_error", "long_error", "rk_calls", "wall_time_s",
)

_ROW_PROPS = {
    "scheme": {"type": "string"},
    "manifold": {"type": "string", "enum": list(MANIFOLDS)},
    "beta": {"type": "number"},
    "alpha": {"type": "number"},
    "backend": {"type": "string"},
    "n": {"type": "integer", "minimum": 1},
    "abs_error": {"type": ["number", "null"]},
    "long_error": {"type": ["number", "null"]},
    "rk_calls": {"type": "integer", "minimum": 0},
    "wall_time_s": {"type": "number", "minimum": 0},
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["spec", "rows", "fit"],
    "properties": {
        "spec": {
            "type": "object",
            "required": ["manifold", "scheme", "backend", "alpha", "beta", "n_grid", "seed"],
            "properties": {
                "manifold": {"type": "string", "enum": list(MANIFOLDS)},
                "scheme": {"type": "string"},
                "backend": {"type": "string"},
                "alpha": {"type": "number"},
                "beta": {"type": "number", "exclusiveMinimum": 0},
                "n_grid": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
                "seed": {"type": "integer"},
            },
        },
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(CSV_FIELDS),
                "properties": _ROW_PROPS,
                "additionalProperties": False,
            },
        },
        "fit": {
            "type": "object",
            "required": ["slope", "intercept", "r_squared", "long_coef"],
            "properties": {
                "slope": {"type": ["number", "null"]},
                "intercept": {"type": ["number", "null"]},
                "r_squared": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                "long_coef": {"type": ["number", "null"]},
                "long_r_squared": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
            },
        },
    },
}


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------


def make_manifold(name: str, beta: float = 1.0):
    if name == "sphere":
        return Sphere()
    if name == "spd":
        return SPD()
    if name == "se3":
        return SE3(beta)
    raise InvalidSpec(f"unknown manifold {name!r}; expected one of {MANIFOLDS}")


def default_vectors(name: str):
    """Base point x, main direction w and transported vector v, all orthonormal and unit length."""
    if name == "sphere":
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    if name == "spd":
        w = np.diag([1.0, -1.0, 0.0]) / np.sqrt(2.0)
        v = np.zeros((3, 3))
        v[0, 1] = v[1, 0] = 1.0 / np.sqrt(2.0)
        return np.eye(3), w, v
    if name == "se3":
        # v = e4, w = e3: the pair for which (∇_w R)(w, v)w ≠ 0 when β ≠ 1
        return np.eye(4), np.eye(6)[2], np.eye(6)[3]
    raise InvalidSpec(f"unknown manifold {name!r}")


def random_vectors(M, seed: int):
    """Random base point with an orthonormal pair (w, v) of unit vectors."""
    rng = np.random.default_rng(seed)
    x = M.random_point(rng)
    c = np.linalg.qr(rng.standard_normal((M.dim, 2)))[0]
    w = M.from_coords(x, c[:, 0])
    v = M.from_coords(x, c[:, 1])
    return x, w, v


@dataclass(frozen=True)
class ExperimentSpec:
    manifold: str = "sphere"
    scheme: str = "schild"
    alpha: Optional[float] = None
    backend: str = "closed_form"
    beta: float = 1.0
    n_grid: Sequence[int] = DEFAULT_N_GRID
    v: object = None  # None: default vectors; "random": drawn from seed; else explicit (x, w, v)
    w: object = None
    x: object = None
    seed: int = 0
    n_ref: Optional[int] = None

    def __post_init__(self):
        try:
            scheme = normalize_scheme(self.scheme)
            backend = normalize_backend(self.backend)
            cfg = LadderConfig(scheme, 2, self.alpha, backend)
        except InvalidInput as exc:
            raise InvalidSpec(str(exc)) from exc
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "alpha", cfg.alpha)
        if self.manifold not in MANIFOLDS:
            raise InvalidSpec(f"unknown manifold {self.manifold!r}")
        beta = float(self.beta)
        if not beta > 0 or not math.isfinite(beta):
            raise InvalidSpec("beta must be positive")
        if self.manifold != "se3" and beta != 1.0:
            raise InvalidSpec("beta only applies to se3")
        object.__setattr__(self, "beta", beta)
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(n < 2 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidSpec("n_grid must be strictly increasing with every n >= 2")
        object.__setattr__(self, "n_grid", grid)
        if self.backend == "closed_form" and self.manifold == "se3" and beta != 1.0:
            raise InvalidSpec("the closed-form backend on se3 needs beta = 1")

    def inputs(self):
        M = make_manifold(self.manifold, self.beta)
        if isinstance(self.v, str) and self.v == "random":
            x, w, v = random_vectors(M, self.seed)
        else:
            x0, w0, v0 = default_vectors(self.manifold)
            x = x0 if self.x is None else np.asarray(self.x, dtype=float)
            w = w0 if self.w is None else np.asarray(self.w, dtype=float)
            v = v0 if self.v is None else np.asarray(self.v, dtype=float)
        try:
            M.check_point(x)
            M.check_tangent(x, w)
            M.check_tangent(x, v)
        except InvalidInput as exc:
            raise InvalidSpec(str(exc)) from exc
        if M.norm(x, w) > M.safe_radius or M.norm(x, v) > M.safe_radius:
            raise InvalidSpec(f"w and v must lie within the safe radius {M.safe_radius} of {M.name}")
        return M, x, w, v

    def echo(self) -> dict:
        return {
            "manifold": self.manifold, "scheme": self.scheme, "backend": self.backend,
            "alpha": self.alpha, "beta": self.beta, "n_grid": list(self.n_grid), "seed": int(self.seed),
        }


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------


def longitudinal_error(M, v_n: TangentVector, ref: TangentVector, w_n: TangentVector) -> float:
    """g(v_n - ref, w_n) at the common endpoint."""
    base = check_same_base(v_n, ref, w_n, tol=M.tol.tol_point)
    return float(M.inner(base, v_n.vec - ref.vec, w_n.vec))


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r_squared))


def _ols(X, Y):
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if np.ptp(X) == 0:
        raise DegenerateFit("all abscissae are equal")
    A = np.stack((X, np.ones_like(X)), axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    ss_res = float(np.sum((Y - A @ (slope, intercept)) ** 2))
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(float(slope), float(intercept), r2)


def fit_slope(xs, ys) -> FitResult:
    """Least squares line through (log x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 3:
        raise DegenerateFit("need at least three (x, y) pairs")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DegenerateFit("log-log fit needs positive data")
    return _ols(np.log(xs), np.log(ys))


def fit_linear(xs, ys) -> FitResult:
    """Least squares line y = slope x + intercept."""
    xs = np.asarray(xs, dtype=float)
    if xs.size < 3:
        raise DegenerateFit("need at least three (x, y) pairs")
    return _ols(xs, ys)


@dataclass(frozen=True)
class ReportRow:
    scheme: str
    manifold: str
    beta: float
    alpha: float
    backend: str
    n: int
    abs_error: float
    long_error: float
    rk_calls: int
    wall_time_s: float


@dataclass(frozen=True)
class ReportFit:
    slope: float = math.nan
    intercept: float = math.nan
    r_squared: float = math.nan
    long_coef: float = math.nan
    long_r_squared: float = math.nan


@dataclass
class ConvergenceReport:
    spec: Optional[dict]
    rows: list = field(default_factory=list)
    fit: ReportFit = field(default_factory=ReportFit)
    failures: list = field(default_factory=list)  # (n, message)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])


def fit_report(rows, alpha, skip: int = FIT_SKIP) -> ReportFit:
    """Slope of log abs_error vs log n and coefficient of long_error vs n^-α, dropping the ``skip`` smallest n."""
    rows = sorted(rows, key=lambda r: r.n)[skip:]
    ok = [r for r in rows if math.isfinite(r.abs_error) and r.abs_error > 0]
    slope = intercept = r2 = math.nan
    if len(ok) >= 3:
        slope, intercept, r2 = fit_slope([r.n for r in ok], [r.abs_error for r in ok])
    lo = [r for r in rows if math.isfinite(r.long_error)]
    coef = lr2 = math.nan
    if len(lo) >= 3:
        coef, _, lr2 = fit_linear([r.n ** (-alpha) for r in lo], [r.long_error for r in lo])
    return ReportFit(slope, intercept, r2, coef, lr2)


def _rebase(M, ref: TangentVector, x_n) -> TangentVector:
    # the scheme's endpoint can differ from the reference one by the integrator error;
    # carry the reference over by tangent projection (the identity on SE(3) body coordinates)
    return TangentVector(x_n, M.project(x_n, ref.vec))


def run_experiment(spec: ExperimentSpec) -> ConvergenceReport:
    M, x, w, v = spec.inputs()
    n_max = spec.n_ref // 4 if spec.n_ref else max(spec.n_grid)
    ref = transport_reference(M, x, w, v, n_max=n_max, full_output=True)
    report = ConvergenceReport(spec.echo())
    for n in spec.n_grid:
        cfg = LadderConfig(spec.scheme, n, spec.alpha, spec.backend)
        try:
            res = transport(M, x, w, v, cfg)
        except LadderError as exc:
            report.failures.append((n, f"{type(exc).__name__}: {exc}"))
            report.rows.append(ReportRow(spec.scheme, spec.manifold, spec.beta, cfg.alpha, spec.backend, n,
                                         math.nan, math.nan, 0, 0.0))
            continue
        x_n = res.endpoint
        v_n = res.transported
        r = _rebase(M, ref.transported, x_n)
        w_n = TangentVector(x_n, res.main_velocity)
        abs_err = M.norm(x_n, v_n.vec - r.vec)
        long_err = longitudinal_error(M, v_n, r, w_n)
        report.rows.append(ReportRow(spec.scheme, spec.manifold, spec.beta, cfg.alpha, spec.backend, n,
                                     float(abs_err), float(long_err), int(res.rk_calls), float(res.wall_time)))
    report.fit = fit_report(report.rows, spec.alpha)
    return report


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _num(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def _unnum(x):
    return math.nan if x is None else float(x)


def report_to_dict(report: ConvergenceReport) -> dict:
    rows = []
    for r in report.rows:
        d = asdict(r)
        d["abs_error"] = _num(d["abs_error"])
        d["long_error"] = _num(d["long_error"])
        rows.append(d)
    return {
        "spec": report.spec,
        "rows": rows,
        "fit": {k: _num(v) for k, v in asdict(report.fit).items()},
    }


def format_report(report: ConvergenceReport, fmt: str = "csv") -> str:
    """Report as CSV text (rows only) or JSON text (spec, rows, fit)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in report.rows:
            # repr keeps every float bit-exact through a round trip
            writer.writerow([repr(x) if isinstance(x, float) else x for x in (getattr(r, k) for k in CSV_FIELDS)])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(report_to_dict(report), indent=2, allow_nan=False) + "\n"
    raise InvalidSpec(f"unknown report format {fmt!r}")


def emit_report(report: ConvergenceReport, path, fmt: str = "csv") -> None:
    """Write ``report`` to ``path``; an existing file is overwritten."""
    text = format_report(report, fmt)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def _row_from_mapping(d) -> ReportRow:
    return ReportRow(
        scheme=str(d["scheme"]), manifold=str(d["manifold"]), beta=float(d["beta"]), alpha=float(d["alpha"]),
        backend=str(d["backend"]), n=int(d["n"]),
        abs_error=_unnum(d["abs_error"]) if not isinstance(d["abs_error"], str) else float(d["abs_error"]),
        long_error=_unnum(d["long_error"]) if not isinstance(d["long_error"], str) else float(d["long_error"]),
        rk_calls=int(d["rk_calls"]), wall_time_s=float(d["wall_time_s"]),
    )


def read_report(path, fmt: Optional[str] = None) -> ConvergenceReport:
    """Inverse of ``emit_report``. CSV files carry rows only; the fit is recomputed from them."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt == "json":
        data = json.loads(path.read_text())
        rows = [_row_from_mapping(d) for d in data["rows"]]
        fit = ReportFit(**{k: _unnum(v) for k, v in data["fit"].items()})
        return ConvergenceReport(data["spec"], rows, fit)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise InvalidSpec(f"{path}: unexpected CSV header {reader.fieldnames}")
        rows = [_row_from_mapping(d) for d in reader]
    fit = fit_report(rows, rows[0].alpha) if rows else ReportFit()
    return ConvergenceReport(None, rows, fit)
