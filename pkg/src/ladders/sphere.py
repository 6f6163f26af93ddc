"""Unit sphere S² ⊂ R³ with the ambient metric."""

import numpy as np

from . import kernels
from .core import DEFAULT_TOLERANCES, Manifold
from .exceptions import AntipodalPoints, InvalidInput, NonTangentInput

ANTIPODAL_CUTOFF = 1e-10
TINY = 1e-12


def _check_tangent(x, w, tol):
    if abs(np.dot(x, w)) > tol * max(1.0, np.linalg.norm(w)):
        raise NonTangentInput(f"vector is not tangent to the sphere at x (<x, w> = {np.dot(x, w):.3e})")


def sphere_exp(x, w, tol=DEFAULT_TOLERANCES):
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    _check_tangent(x, w, tol.tol_tangent)
    theta = np.linalg.norm(w)
    if theta < TINY:
        return x + w
    return np.cos(theta) * x + np.sin(theta) * (w / theta)


def sphere_log(x, y, tol=DEFAULT_TOLERANCES):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = float(np.dot(x, y))
    if c <= -1.0 + ANTIPODAL_CUTOFF:
        raise AntipodalPoints("log is not unique between antipodal points")
    perp = y - c * x
    s = np.linalg.norm(perp)
    if s < TINY:
        return perp
    # atan2 keeps full relative accuracy for nearby points, unlike arccos
    return np.arctan2(s, c) * perp / s


def sphere_transport(x, w, v, t=1.0, tol=DEFAULT_TOLERANCES):
    """Parallel transport of ``v`` along t ↦ exp_x(t w), evaluated at ``t``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    _check_tangent(x, w, tol.tol_tangent)
    _check_tangent(x, v, tol.tol_tangent)
    theta = np.linalg.norm(w)
    if theta < TINY:
        return v.copy()
    e = w / theta
    a = np.dot(v, e)
    theta *= t
    return a * (-np.sin(theta) * x + np.cos(theta) * e) + (v - a * e)


def _tangent_basis(x):
    # deterministic orthonormal frame of T_x S²
    k = int(np.argmin(np.abs(x)))
    a = np.zeros(3)
    a[k] = 1.0
    b1 = a - np.dot(a, x) * x
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(x, b1)
    return np.stack((b1, b2), axis=1)


class Sphere(Manifold):
    name = "sphere"
    dim = 2
    safe_radius = np.pi - 0.1
    has_nabla_riemann = True

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def exp(self, x, v):
        return sphere_exp(x, v, self.tol)

    def log(self, x, y):
        return sphere_log(x, y, self.tol)

    def dist(self, x, y):
        c = float(np.dot(x, y))
        return float(np.arctan2(np.linalg.norm(y - c * x), c))

    def transport(self, x, w, v, t=1.0):
        return sphere_transport(x, w, v, t, self.tol)

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (3,) or abs(np.linalg.norm(x) - 1.0) > self.tol.tol_point:
            raise InvalidInput("not a unit vector of R^3")
        return x

    def check_tangent(self, x, v):
        _check_tangent(x, v, self.tol.tol_tangent)
        return v

    def project(self, x, v):
        x = x / np.linalg.norm(x)
        return v - np.dot(v, x) * x

    def ambient_to_tangent(self, x, delta):
        return self.project(x, delta)

    def riemann(self, x, u, v, w):
        # constant curvature 1: R(u, v)w = <v, w>u - <u, w>v
        return np.dot(v, w) * u - np.dot(u, w) * v

    def nabla_riemann(self, x, u, v, w, z):
        return np.zeros(3)

    def pack(self, x, v):
        return np.concatenate((x, v)).astype(float)

    def unpack(self, y):
        return y[:3].copy(), y[3:].copy()

    def geodesic_rhs(self, y):
        return kernels.sphere_rhs(np.asarray(y, dtype=float))

    def rk_step(self, y, h):
        return kernels.rk4_sphere(y, float(h))

    def chart(self, x):
        return np.asarray(x, dtype=float)

    def to_coords(self, x, v):
        return _tangent_basis(x).T @ v

    def from_coords(self, x, c):
        return _tangent_basis(x) @ c

    def zero_tangent(self, x):
        return np.zeros(3)

    def random_point(self, rng):
        x = rng.standard_normal(3)
        return x / np.linalg.norm(x)
