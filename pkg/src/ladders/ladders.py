"""Ladder schemes for parallel transport along a geodesic.

Elementary constructions (one rung) are written against a small backend
object exposing ``exp(x, d)`` and ``log(x, y)``: the closed-form backend uses
the manifold's maps, the infinitesimal backend replaces them by one RK4 step
of size h and its shooting inverse (``exp~(x, d) = rk1(x, d/h, h)``,
``log~(x, y) = h rk⁻¹_x(y)``). ``transport`` iterates the rungs along the
main geodesic with the usual scaling v_{i+1} = n^α step(x_i, w_i/n, v_i/n^α).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DEFAULT_TOLERANCES, Manifold, TangentVector, ToleranceConfig
from .exceptions import BetaNotOne, InvalidInput, LadderDiverged, LadderError
from .ode import RkCallCounter, integrate_geodesic, rk1, rk_inverse, rk_step

SCHEMES = ("schild", "pole", "averaged_schild", "fanning")
BACKENDS = ("closed_form", "infinitesimal")
DEFAULT_ALPHA = {"schild": 2.0, "pole": 1.0, "averaged_schild": 2.0, "fanning": 2.0}
_SCHEME_ALIASES = {"averaged": "averaged_schild", "sl": "schild", "pl": "pole", "fs": "fanning"}
_BACKEND_ALIASES = {"closed": "closed_form", "exact": "closed_form", "rk": "infinitesimal"}
GUARD_FACTOR = 4.0
# shooting tolerance inside ladders: 0 means "down to the round-off floor", which is ≤ h⁵
LADDER_SHOOT_TOL = 0.0


def normalize_scheme(name: str) -> str:
    name = _SCHEME_ALIASES.get(name, name)
    if name not in SCHEMES:
        raise InvalidInput(f"unknown scheme {name!r}; expected one of {SCHEMES}")
    return name


def normalize_backend(name: str) -> str:
    name = _BACKEND_ALIASES.get(name, name)
    if name not in BACKENDS:
        raise InvalidInput(f"unknown backend {name!r}; expected one of {BACKENDS}")
    return name


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------


class ClosedForm:
    """exp/log straight from the manifold."""

    def __init__(self, M: Manifold):
        if not M.has_closed_form:
            raise BetaNotOne(f"{M!r} has no closed-form exp/log")
        self.M = M
        self.counter = RkCallCounter()

    def exp(self, x, d):
        return self.M.exp(x, d)

    def log(self, x, y):
        return self.M.log(x, y)


class Infinitesimal:
    """exp/log replaced by one RK4 step of size ``h`` and its shooting inverse."""

    def __init__(self, M: Manifold, h: float, counter: Optional[RkCallCounter] = None,
                 tol: Optional[float] = LADDER_SHOOT_TOL):
        self.M = M
        self.h = float(h)
        self.counter = counter if counter is not None else RkCallCounter()
        self.tol = tol

    def exp(self, x, d):
        return rk1(self.M, x, np.asarray(d) / self.h, self.h, self.counter)

    def log(self, x, y):
        return self.h * rk_inverse(self.M, x, y, self.h, self.tol, self.counter)


class FineGeodesics:
    """exp/log by ``substeps`` RK4 steps over unit time and the matching shooting.

    An accurate numerical stand-in for the closed forms on manifolds that
    lack them; used for single-rung studies, not by ``transport``.
    """

    def __init__(self, M: Manifold, substeps: int = 64, counter: Optional[RkCallCounter] = None):
        self.M = M
        self.substeps = int(substeps)
        self.counter = counter if counter is not None else RkCallCounter()

    def exp(self, x, d):
        return integrate_geodesic(self.M, x, d, 1.0, self.substeps, self.counter)[0]

    def log(self, x, y):
        return rk_inverse(self.M, x, y, 1.0, 0.0, self.counter, substeps=self.substeps)


def _backend(M, backend):
    return ClosedForm(M) if backend is None else backend


# ---------------------------------------------------------------------------
# elementary steps
# ---------------------------------------------------------------------------


def schild_step(M: Manifold, x, w, v, backend=None, x_w=None):
    """One Schild parallelogram: returns u at x_w = exp_x(w).

    x_v = exp_x(v), m = exp_{x_v}(½ log_{x_v}(x_w)), z = exp_x(2 log_x(m)),
    u = log_{x_w}(z).
    """
    B = _backend(M, backend)
    if x_w is None:
        x_w = B.exp(x, w)
    x_v = B.exp(x, v)
    m = B.exp(x_v, 0.5 * B.log(x_v, x_w))
    z = B.exp(x, 2.0 * B.log(x, m))
    return B.log(x_w, z)


def pole_step(M: Manifold, x, w, v, backend=None, x_w=None):
    """One pole rung: reflect exp_x(v) through m = exp_x(w/2), then u = -log_{x_w}(z')."""
    B = _backend(M, backend)
    if x_w is None:
        x_w = B.exp(x, w)
    m = B.exp(x, 0.5 * np.asarray(w))
    z = B.exp(x, v)
    z_ref = B.exp(m, -B.log(m, z))
    return -B.log(x_w, z_ref)


def averaged_schild_step(M: Manifold, x, w, v, backend=None, x_w=None):
    """(schild(v) - schild(-v)) / 2, which cancels the ½R(w,v)v term."""
    B = _backend(M, backend)
    if x_w is None:
        x_w = B.exp(x, w)
    v = np.asarray(v)
    return 0.5 * (schild_step(M, x, w, v, B, x_w) - schild_step(M, x, w, -v, B, x_w))


def fanning_step(M: Manifold, x, w, v, h: float, eps: float, backend=None, x_w=None,
                 central: bool = True):
    """Jacobi-field difference quotient along the geodesic exp_x(s w), s ∈ [0, h].

    Central: (exp_x(h(w + εv)) - exp_x(h(w - εv))) / (2hε); one-sided:
    (exp_x(h(w + εv)) - exp_x(hw)) / (hε). The ambient difference is read
    as a tangent vector at x_w = exp_x(hw).
    """
    B = _backend(M, backend)
    w = np.asarray(w)
    v = np.asarray(v)
    if x_w is None:
        x_w = B.exp(x, h * w)
    plus = B.exp(x, h * (w + eps * v))
    if central:
        minus = B.exp(x, h * (w - eps * v))
        delta = (np.asarray(plus) - np.asarray(minus)) / (2.0 * h * eps)
    else:
        delta = (np.asarray(plus) - np.asarray(x_w)) / (h * eps)
    return M.ambient_to_tangent(x_w, delta)


# ---------------------------------------------------------------------------
# iterated transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LadderConfig:
    scheme: str = "schild"
    n: int = 10
    alpha: Optional[float] = None
    backend: str = "closed_form"
    tolerances: ToleranceConfig = field(default=DEFAULT_TOLERANCES)
    central_fanning: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scheme", normalize_scheme(self.scheme))
        object.__setattr__(self, "backend", normalize_backend(self.backend))
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInput("n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        if self.scheme == "fanning":
            # ε = h = 1/n: the scaling is fixed
            object.__setattr__(self, "alpha", 2.0)
        elif self.alpha is None:
            object.__setattr__(self, "alpha", DEFAULT_ALPHA[self.scheme])
        a = float(self.alpha)
        if not 1.0 <= a <= 2.0:
            raise InvalidInput("alpha must lie in [1, 2]")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True, eq=False)
class TransportResult:
    transported: TangentVector
    endpoint: np.ndarray
    main_velocity: np.ndarray  # w_n, velocity of the main geodesic at the endpoint
    rk_calls: int
    wall_time: float


def _guard(M, x, v_i, limit, rung):
    if limit > 0 and M.norm(x, v_i) > limit:
        raise LadderDiverged(f"rung {rung}: transported vector left the {GUARD_FACTOR:g}|v| envelope", rung)


def _closed_main_geodesic(M, x, w, n):
    """Points x_i = exp_x(i w / n) and velocities w_i (scaled to unit time)."""
    xs = [np.asarray(x, dtype=float)] + [M.exp(x, (i / n) * np.asarray(w)) for i in range(1, n + 1)]
    ws = [np.asarray(w, dtype=float)]
    for i in range(1, n):
        ws.append(n * M.log(xs[i], xs[i + 1]))
    ws.append(-n * M.log(xs[n], xs[n - 1]))
    return xs, ws


def _explicit_rungs(M, x, w, v, cfg, B, step):
    n, na = cfg.n, float(cfg.n) ** cfg.alpha
    h = 1.0 / n
    limit = GUARD_FACTOR * M.norm(x, v)
    if isinstance(B, ClosedForm):
        xs, ws = _closed_main_geodesic(M, x, w, n)
        advance = None
    else:
        xs, ws = [np.asarray(x, dtype=float)], [np.asarray(w, dtype=float)]
        advance = True
    v_i = np.asarray(v, dtype=float)
    for i in range(n):
        try:
            if advance:
                x_next, w_next = rk_step(M, xs[i], ws[i], h, B.counter)
                xs.append(x_next)
                ws.append(w_next)
            if cfg.scheme == "fanning":
                v_i = fanning_step(M, xs[i], ws[i], v_i, h, h, B, xs[i + 1], cfg.central_fanning)
            else:
                v_i = na * step(M, xs[i], h * ws[i], v_i / na, B, xs[i + 1])
        except LadderError as exc:
            if exc.rung is None:
                exc.rung = i
            raise
        _guard(M, xs[i + 1], v_i, limit, i)
    return xs[n], ws[n], v_i


def _infinitesimal_pole(M, x, w, v, cfg, B):
    """Pole ladder on the RK4 geodesics: z̃ is reflected through successive midpoints."""
    n, a = cfg.n, cfg.alpha
    h = 1.0 / n
    C = B.counter
    limit = GUARD_FACTOR * M.norm(x, v)
    # main geodesic: half step to m̃_0, n - 1 full steps between midpoints, half step to x̃_n
    m, wm = rk_step(M, x, w, 0.5 * h, C)
    z = rk1(M, x, np.asarray(v, dtype=float) * n ** (1.0 - a), h, C)
    # cheap divergence proxy: chart distance between z̃_i and its reflection centre
    d0 = float(np.linalg.norm(M.chart(z) - M.chart(m)))
    for i in range(n):
        try:
            z = rk1(M, m, -rk_inverse(M, m, z, h, B.tol, C), h, C)
            if i < n - 1:
                m, wm = rk_step(M, m, wm, h, C)
        except LadderError as exc:
            if exc.rung is None:
                exc.rung = i
            raise
        if limit > 0 and np.linalg.norm(M.chart(z) - M.chart(m)) > GUARD_FACTOR * d0:
            raise LadderDiverged(f"rung {i}: reflected point drifted away from the main geodesic", i)
    x_n, w_n = rk_step(M, m, wm, 0.5 * h, C)
    try:
        v_n = (-1.0) ** n * n ** (a - 1.0) * rk_inverse(M, x_n, z, h, B.tol, C)
    except LadderError as exc:
        exc.rung = n
        raise
    _guard(M, x_n, v_n, limit, n)
    return x_n, w_n, v_n


_STEPS = {"schild": schild_step, "pole": pole_step, "averaged_schild": averaged_schild_step}


def transport(M: Manifold, x, w, v, config: Optional[LadderConfig] = None, **kwargs) -> TransportResult:
    """Transport ``v`` from ``x`` to exp_x(w) with the configured ladder."""
    cfg = config if config is not None else LadderConfig(**kwargs)
    x = np.asarray(x, dtype=float)
    w = M.check_tangent(x, np.asarray(w, dtype=float))
    v = M.check_tangent(x, np.asarray(v, dtype=float))
    counter = RkCallCounter()
    t0 = time.perf_counter()
    if cfg.backend == "closed_form":
        B = ClosedForm(M)
    else:
        B = Infinitesimal(M, 1.0 / cfg.n, counter)
    if cfg.backend == "infinitesimal" and cfg.scheme == "pole":
        x_n, w_n, v_n = _infinitesimal_pole(M, x, w, v, cfg, B)
    else:
        x_n, w_n, v_n = _explicit_rungs(M, x, w, v, cfg, B, _STEPS.get(cfg.scheme))
    wall = time.perf_counter() - t0
    return TransportResult(TangentVector(x_n, v_n), x_n, w_n, counter.calls, wall)


def transport_reference(M: Manifold, x, w, v, n_max: int = 320, full_output: bool = False):
    """Most accurate available transport of ``v`` along exp_x(s w).

    Closed-form transport where the manifold has one, otherwise the
    infinitesimal pole ladder with n_ref = 4 n_max rungs.
    """
    if M.has_closed_form:
        end = M.exp(x, w)
        ref = TangentVector(end, M.transport(x, w, v))
        if full_output:
            return TransportResult(ref, end, M.transport(x, w, w), 0, 0.0)
        return ref
    res = transport(M, x, w, v, LadderConfig("pole", 4 * int(n_max), 1.0, "infinitesimal"))
    return res if full_output else res.transported
