"""RK4 stepping of the geodesic equation and its shooting inverse.

``rk1(x, v, h)`` below always means one RK4 step of size ``h`` from position
``x`` with velocity ``v``; the manifold supplies the compiled kernel through
``Manifold.rk_step``. ``rk_inverse`` solves ``rk1(x, v, h) = y`` for ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Manifold
from .exceptions import NonFiniteState, ShootingDiverged

FD_STEP = 1e-6
NOISE_FLOOR = 1e-14


@dataclass
class RkCallCounter:
    """Number of single RK4 steps taken, shooting iterations included."""

    calls: int = 0

    def tick(self, k: int = 1):
        self.calls += k


@dataclass(frozen=True, eq=False)
class GeodesicState:
    """Position and velocity in the manifold's own representation."""

    position: np.ndarray
    velocity: np.ndarray

    def flat(self, M: Manifold) -> np.ndarray:
        return M.pack(self.position, self.velocity)

    @classmethod
    def from_flat(cls, M: Manifold, y) -> "GeodesicState":
        x, v = M.unpack(np.asarray(y, dtype=float))
        return cls(x, v)


def rk4_step(y, h: float, rhs: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Classical RK4 update of a flat state for an autonomous ODE."""
    y = np.asarray(y, dtype=float)
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("RK4 step produced a non-finite state")
    return out


def rk_step(M: Manifold, x, v, h: float, counter: Optional[RkCallCounter] = None):
    """One geodesic RK4 step: returns (position, velocity) after time ``h``."""
    out = M.rk_step(M.pack(x, v), h)
    if counter is not None:
        counter.tick()
    if not np.all(np.isfinite(out)):
        raise NonFiniteState("geodesic RK4 step produced a non-finite state")
    return M.unpack(out)


def rk1(M: Manifold, x, v, h: float, counter: Optional[RkCallCounter] = None):
    """Endpoint only of one geodesic RK4 step."""
    return rk_step(M, x, v, h, counter)[0]


def integrate_geodesic(M: Manifold, x, v, t: float = 1.0, steps: int = 1,
                       counter: Optional[RkCallCounter] = None):
    """Integrate the geodesic from (x, v) over [0, t] with ``steps`` RK4 steps."""
    steps = int(steps)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = float(t) / steps
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    for _ in range(steps):
        x, v = rk_step(M, x, v, h, counter)
    return x, v


@dataclass(frozen=True, eq=False)
class ShootingResult:
    velocity: np.ndarray
    residual: float
    iterations: int
    calls: int


def rk_inverse(M: Manifold, x, y, h: float, tol: Optional[float] = None,
               counter: Optional[RkCallCounter] = None, max_iters: Optional[int] = None,
               full_output: bool = False, substeps: int = 1):
    """Velocity ``v`` at ``x`` with ``rk1(x, v, h) = y``.

    With ``substeps > 1`` the forward map is ``substeps`` RK4 steps of size
    ``h / substeps`` instead of a single one (a fine shooting log).

    The unknown is the displacement ``d = h v`` in the coordinates given by
    ``M.to_coords``; the residual is the chart-space mismatch of the
    endpoint. A Gauss–Newton (chord) iteration is used with a central
    finite-difference Jacobian that is only refreshed when the residual stops
    contracting fast. The tolerance defaults to ``h**5`` but never goes below
    the round-off floor ``1e-14`` relative to the size of ``y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = float(h)
    if not h > 0:
        raise ValueError("h must be positive")
    target = M.chart(y)
    scale = max(1.0, float(np.max(np.abs(target))))
    # hard bound accepted when the iteration stalls above a stricter target
    bound = M.tol.log_tolerance(h)
    tol = bound if tol is None else float(tol)
    tol = max(tol, NOISE_FLOOR * scale)
    bound = max(bound, 100.0 * tol)
    max_iters = M.tol.max_gd_iters if max_iters is None else int(max_iters)
    calls = 0

    def F(d):
        nonlocal calls
        calls += 1
        v = M.from_coords(x, d) / h
        out = M.pack(x, v)
        for _ in range(substeps):
            out = M.rk_step(out, h / substeps)
        calls += substeps - 1
        if not np.all(np.isfinite(out)):
            raise NonFiniteState("non-finite state while shooting")
        return M.chart(M.unpack(out)[0]) - target

    def jacobian(d):
        cols = []
        for k in range(d.size):
            e = np.zeros(d.size)
            e[k] = FD_STEP
            cols.append((F(d + e) - F(d - e)) / (2.0 * FD_STEP))
        return np.stack(cols, axis=1)

    try:
        d = M.to_coords(x, M.ambient_to_tangent(x, y - x))
        r = F(d)
        res = float(np.linalg.norm(r))
        it = 0
        J = None
        fresh = False
        at_floor = False
        while res > tol and it < max_iters:
            it += 1
            if J is None:
                J = jacobian(d)
                fresh = True
                if not np.all(np.isfinite(J)):
                    raise ShootingDiverged("non-finite shooting Jacobian", res, M.from_coords(x, d) / h)
            try:
                step = np.linalg.lstsq(J, r, rcond=None)[0]
            except np.linalg.LinAlgError:
                # fixed-step gradient descent on ½‖r‖²
                step = J.T @ r / max(float(np.sum(J * J)), 1e-300)
            lam = 1.0
            d_new = d - step
            r_new = F(d_new)
            res_new = float(np.linalg.norm(r_new))
            if res_new >= res:
                if not fresh:
                    J = None  # stale Jacobian: rebuild it here and retry
                    continue
                if res <= bound:
                    at_floor = True  # stalled at round-off (or drift) level
                    break
                while res_new >= res and lam > 1e-3:
                    lam *= 0.5
                    d_new = d - lam * step
                    r_new = F(d_new)
                    res_new = float(np.linalg.norm(r_new))
                if res_new >= res:
                    break
            if res_new > 0.5 * res:
                J = None  # poor contraction: refresh next iteration
            fresh = False
            d, r, res = d_new, r_new, res_new
        if not (res <= tol or at_floor) or not np.isfinite(res):
            raise ShootingDiverged(
                f"shooting did not reach tolerance {tol:.2e} in {it} iterations "
                f"(best residual {res:.3e})",
                best_residual=res,
                best_velocity=M.from_coords(x, d) / h,
            )
    finally:
        if counter is not None:
            counter.tick(calls)
    v = M.from_coords(x, d) / h
    if full_output:
        return ShootingResult(v, res, it, calls)
    return v

