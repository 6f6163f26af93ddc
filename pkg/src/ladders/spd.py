"""SPD(3) with the affine-invariant metric g_S(V, W) = tr(S⁻¹ V S⁻¹ W)."""

import numpy as np

from . import kernels
from .core import Manifold
from .exceptions import NonSymmetricInput, NotPositiveDefinite

EIG_FLOOR = 1e-14
_SYM_TOL = 1e-9


def sym(M):
    return 0.5 * (M + M.T)


def _eigh(S):
    vals, vecs = np.linalg.eigh(sym(S))
    return vals, vecs


def _apply(vals, vecs, fn):
    return (vecs * fn(vals)) @ vecs.T


def sqrtm_spd(S):
    vals, vecs = _eigh(S)
    vals = np.maximum(vals, EIG_FLOOR)
    r = np.sqrt(vals)
    return (vecs * r) @ vecs.T, (vecs / r) @ vecs.T


def expm_sym(A):
    vals, vecs = _eigh(A)
    return _apply(vals, vecs, np.exp)


def logm_spd(S):
    vals, vecs = _eigh(S)
    if vals[0] <= 0:
        raise NotPositiveDefinite("matrix has a non-positive eigenvalue")
    return _apply(np.maximum(vals, EIG_FLOOR), vecs, np.log)


def _check_sym(M, what="input"):
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise NonSymmetricInput(f"{what} must be 3x3")
    if np.max(np.abs(M - M.T)) > _SYM_TOL * max(1.0, np.max(np.abs(M))):
        raise NonSymmetricInput(f"{what} is not symmetric")
    return sym(M)


def _check_spd(S):
    S = np.asarray(S, dtype=float)
    if S.shape != (3, 3) or np.max(np.abs(S - S.T)) > _SYM_TOL * max(1.0, np.max(np.abs(S))):
        raise NotPositiveDefinite("point is not a symmetric 3x3 matrix")
    S = sym(S)
    if np.linalg.eigvalsh(S)[0] <= 0:
        raise NotPositiveDefinite("point is not positive definite")
    return S


def spd_exp(S, W):
    S = sym(np.asarray(S, dtype=float))
    W = _check_sym(W, "tangent vector")
    r, ri = sqrtm_spd(S)
    return sym(r @ expm_sym(ri @ W @ ri) @ r)


def spd_log(S1, S2):
    S1 = _check_spd(S1)
    S2 = _check_spd(S2)
    r, ri = sqrtm_spd(S1)
    return sym(r @ logm_spd(ri @ S2 @ ri) @ r)


def spd_transport(S, W, V, t=1.0):
    S = sym(np.asarray(S, dtype=float))
    W = _check_sym(W, "direction")
    V = _check_sym(V, "transported vector")
    r, ri = sqrtm_spd(S)
    P = r @ expm_sym(0.5 * t * (ri @ W @ ri)) @ ri
    return sym(P @ V @ P.T)


def spd_inner(S, U, V):
    A = np.linalg.solve(S, U)
    B = np.linalg.solve(S, V)
    return float(np.trace(A @ B))


_IU = np.triu_indices(3, 1)


def sym_from_coords(c):
    """Symmetric matrix from 6 coordinates, orthonormal for the Frobenius inner product."""
    M = np.diag(c[:3]).astype(float)
    off = np.asarray(c[3:], dtype=float) / np.sqrt(2.0)
    M[_IU] = off
    M[(_IU[1], _IU[0])] = off
    return M


def sym_to_coords(M):
    return np.concatenate((np.diag(M), np.sqrt(2.0) * M[_IU]))


class SPD(Manifold):
    name = "spd"
    dim = 6
    safe_radius = np.inf
    has_nabla_riemann = True

    def inner(self, x, u, v):
        return spd_inner(x, u, v)

    def exp(self, x, v):
        return spd_exp(x, v)

    def log(self, x, y):
        return spd_log(x, y)

    def transport(self, x, w, v, t=1.0):
        return spd_transport(x, w, v, t)

    def check_point(self, x):
        return _check_spd(x)

    def check_tangent(self, x, v):
        return _check_sym(v)

    def project(self, x, v):
        return sym(np.asarray(v, dtype=float))

    def ambient_to_tangent(self, x, delta):
        return sym(np.asarray(delta, dtype=float))

    def riemann(self, x, u, v, w):
        # R_I(X, Y)Z = -1/4 [[X, Y], Z], moved to x by the congruence x^{1/2} . x^{1/2}
        r, ri = sqrtm_spd(x)
        X, Y, Z = (ri @ a @ ri for a in (u, v, w))
        B = X @ Y - Y @ X
        return r @ (-0.25 * (B @ Z - Z @ B)) @ r

    def nabla_riemann(self, x, u, v, w, z):
        return np.zeros((3, 3))

    def pack(self, x, v):
        return np.concatenate((np.ravel(x), np.ravel(v))).astype(float)

    def unpack(self, y):
        return y[:9].reshape(3, 3).copy(), y[9:].reshape(3, 3).copy()

    def geodesic_rhs(self, y):
        return kernels.spd_rhs(np.asarray(y, dtype=float))

    def rk_step(self, y, h):
        return kernels.rk4_spd(y, float(h))

    def chart(self, x):
        return np.asarray(x, dtype=float)[np.triu_indices(3)]

    def to_coords(self, x, v):
        r, ri = sqrtm_spd(x)
        return sym_to_coords(ri @ v @ ri)

    def from_coords(self, x, c):
        r, _ = sqrtm_spd(x)
        return sym(r @ sym_from_coords(c) @ r)

    def zero_tangent(self, x):
        return np.zeros((3, 3))

    def random_point(self, rng):
        A = rng.standard_normal((3, 3))
        return sym(expm_sym(sym(A) * 0.5))
