"""Shared geometry layer: tolerances, point/vector containers, the manifold
interface used by the ladder schemes, and curvature-based error predictions.

Tangent vectors are stored in the manifold's own vector representation
(ambient vectors on the sphere, symmetric matrices on SPD(3), left-translated
Lie algebra coefficients on SE(3)), so plain numpy arithmetic on them is
arithmetic in a single tangent space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import BasePointMismatch, MissingDerivativeOracle


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances.

    ``tol_log=None`` means "use h**5", h being the integrator step of the
    shooting problem at hand.
    """

    tol_point: float = 1e-9
    tol_tangent: float = 1e-9
    tol_log: Optional[float] = None
    max_gd_iters: int = 30

    def __post_init__(self):
        for name in ("tol_point", "tol_tangent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.tol_log is not None and not self.tol_log > 0:
            raise ValueError("tol_log must be strictly positive")
        if int(self.max_gd_iters) < 1:
            raise ValueError("max_gd_iters must be a positive integer")

    def log_tolerance(self, h):
        return self.tol_log if self.tol_log is not None else h**5


DEFAULT_TOLERANCES = ToleranceConfig()


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: np.ndarray
    vec: np.ndarray

    def __post_init__(self):
        base = self.base.coords if isinstance(self.base, ManifoldPoint) else self.base
        object.__setattr__(self, "base", np.asarray(base, dtype=float))
        object.__setattr__(self, "vec", np.asarray(self.vec, dtype=float))


def check_same_base(*vectors: TangentVector, tol: float = DEFAULT_TOLERANCES.tol_point):
    ref = vectors[0].base
    for other in vectors[1:]:
        if other.base.shape != ref.shape or np.max(np.abs(other.base - ref)) > tol:
            raise BasePointMismatch("tangent vectors are attached to different base points")
    return ref


@dataclass(frozen=True)
class CurvatureOracle:
    """Curvature tensor R(u,v)w at a point, and (∇_u R)(v,w)z where known."""

    point: np.ndarray
    riemann: Callable
    nabla_riemann: Optional[Callable] = None

    def R(self, u, v, w):
        return self.riemann(u, v, w)

    def nabla_R(self, u, v, w, z):
        if self.nabla_riemann is None:
            raise MissingDerivativeOracle("no covariant derivative of the curvature available")
        return self.nabla_riemann(u, v, w, z)


class Manifold:
    """Interface shared by the sphere, SPD(3) and SE(3).

    Subclasses provide the closed-form maps when they exist and the geodesic
    ODE used by the infinitesimal schemes: ``pack``/``unpack`` convert between
    (point, velocity) and the flat integrator state, ``rk_step`` advances that
    state by one RK4 step, ``chart`` flattens a point into the coordinates
    the shooting residual is measured in, and ``to_coords``/``from_coords``
    map tangent vectors to unconstrained coordinates.
    """

    name = "manifold"
    dim = 0
    safe_radius = np.inf
    has_closed_form = True
    has_nabla_riemann = False

    def __init__(self, tol: ToleranceConfig = DEFAULT_TOLERANCES):
        self.tol = tol

    # metric
    def inner(self, x, u, v):
        raise NotImplementedError

    def norm(self, x, v):
        return float(np.sqrt(max(self.inner(x, v, v), 0.0)))

    def dist(self, x, y):
        return self.norm(x, self.log(x, y))

    # closed forms
    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def transport(self, x, w, v, t=1.0):
        raise NotImplementedError

    # representation helpers
    def check_point(self, x):
        raise NotImplementedError

    def check_tangent(self, x, v):
        raise NotImplementedError

    def project(self, x, v):
        raise NotImplementedError

    def ambient_to_tangent(self, x, delta):
        """Tangent vector at ``x`` closest to an ambient (chart) displacement."""
        raise NotImplementedError

    # curvature
    def riemann(self, x, u, v, w):
        raise NotImplementedError

    def nabla_riemann(self, x, u, v, w, z):
        raise MissingDerivativeOracle(f"{self.name}: covariant derivative of R not available")

    def curvature_oracle(self, x) -> CurvatureOracle:
        nabla = None
        if self.has_nabla_riemann:
            nabla = lambda u, v, w, z: self.nabla_riemann(x, u, v, w, z)  # noqa: E731
        return CurvatureOracle(
            point=np.asarray(x, dtype=float),
            riemann=lambda u, v, w: self.riemann(x, u, v, w),
            nabla_riemann=nabla,
        )

    # geodesic ODE
    def pack(self, x, v):
        raise NotImplementedError

    def unpack(self, y):
        raise NotImplementedError

    def geodesic_rhs(self, y):
        raise NotImplementedError

    def rk_step(self, y, h):
        raise NotImplementedError

    def chart(self, x):
        raise NotImplementedError

    def to_coords(self, x, v):
        raise NotImplementedError

    def from_coords(self, x, c):
        raise NotImplementedError

    def zero_tangent(self, x):
        raise NotImplementedError

    # sampling
    def random_point(self, rng):
        raise NotImplementedError

    def random_tangent(self, rng, x, norm=None):
        c = rng.standard_normal(self.dim)
        v = self.from_coords(x, c)
        if norm is not None:
            v = v * (norm / self.norm(x, v))
        return v


def inner(manifold: Manifold, u: TangentVector, v: TangentVector, x=None) -> float:
    """Metric inner product g_x(u, v) of two tangent vectors at the same point."""
    base = check_same_base(u, v, tol=manifold.tol.tol_point)
    if x is not None:
        check_same_base(u, TangentVector(x, u.vec), tol=manifold.tol.tol_point)
    return float(manifold.inner(base, u.vec, v.vec))


def schild_error_prediction(curv: CurvatureOracle, v: TangentVector, w: TangentVector) -> TangentVector:
    """Leading deviation ½ R(w, v) v of one Schild rung."""
    base = check_same_base(v, w)
    return TangentVector(base, 0.5 * curv.R(w.vec, v.vec, v.vec))


def pole_error_prediction(curv: CurvatureOracle, v: TangentVector, w: TangentVector) -> TangentVector:
    """Leading deviation of one pole rung, centred at the midpoint.

    (1/12) [ (∇_w R)(w, v)(5v - w) + (∇_v R)(w, v)(2v - w) ]
    """
    base = check_same_base(v, w)
    a, b = v.vec, w.vec
    term = curv.nabla_R(b, b, a, 5.0 * a - b) + curv.nabla_R(a, b, a, 2.0 * a - b)
    return TangentVector(base, term / 12.0)


# Independent curvature oracle: Levi-Civita connection of a metric given in a
# chart, differentiated numerically. Used to cross-check the analytic tensors.

@dataclass
class MetricChart:
    """Metric tensor field ``metric(a) -> (d, d)`` on a chart around a = 0."""

    metric: Callable[[np.ndarray], np.ndarray]
    dim: int
    step: float = 1e-3

    def _unit(self, i):
        e = np.zeros(self.dim)
        e[i] = self.step
        return e

    def christoffel(self, a):
        """Γ[i, j, l] with ∇_{∂i} ∂j = Σ_l Γ[i, j, l] ∂l."""
        a = np.asarray(a, dtype=float)
        d = self.dim
        dg = np.empty((d, d, d))  # dg[m] = ∂_m g
        for m in range(d):
            e = self._unit(m)
            dg[m] = (self.metric(a + e) - self.metric(a - e)) / (2 * self.step)
        ginv = np.linalg.inv(self.metric(a))
        # lowered: Γ_{ij,m} = ½ (∂_i g_{mj} + ∂_j g_{mi} - ∂_m g_{ij})
        low = 0.5 * (np.einsum("imj->ijm", dg) + np.einsum("jmi->ijm", dg) - np.einsum("mij->ijm", dg))
        return np.einsum("ijm,ml->ijl", low, ginv)

    def riemann(self, a):
        """R[i, j, k, l] with R(∂i, ∂j)∂k = Σ_l R[i, j, k, l] ∂l."""
        a = np.asarray(a, dtype=float)
        d = self.dim
        G = self.christoffel(a)
        dG = np.empty((d, d, d, d))  # dG[i] = ∂_i Γ
        for i in range(d):
            e = self._unit(i)
            dG[i] = (self.christoffel(a + e) - self.christoffel(a - e)) / (2 * self.step)
        return (
            np.einsum("ijkl->ijkl", dG)
            - np.einsum("jikl->ijkl", dG)
            + np.einsum("jkm,iml->ijkl", G, G)
            - np.einsum("ikm,jml->ijkl", G, G)
        )

    def nabla_riemann(self, a=None):
        """N[i, j, k, l, m] = components of (∇_{∂i} R)(∂j, ∂k)∂l along ∂m."""
        d = self.dim
        a = np.zeros(d) if a is None else np.asarray(a, dtype=float)
        G = self.christoffel(a)
        Rm = self.riemann(a)
        dR = np.empty((d,) * 5)
        for i in range(d):
            e = self._unit(i)
            dR[i] = (self.riemann(a + e) - self.riemann(a - e)) / (2 * self.step)
        return (
            dR
            + np.einsum("jklp,ipm->ijklm", Rm, G)
            - np.einsum("ijp,pklm->ijklm", G, Rm)
            - np.einsum("ikp,jplm->ijklm", G, Rm)
            - np.einsum("ilp,jkpm->ijklm", G, Rm)
        )

    def sectional(self, u, v, a=None):
        a = np.zeros(self.dim) if a is None else a
        g = self.metric(a)
        Rm = self.riemann(a)
        Ruvv = np.einsum("i,j,k,ijkl->l", v, u, u, Rm)  # R(v, u) u
        num = Ruvv @ g @ v
        den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
        return float(num / den)
