"""SE(3) with the left-invariant metric G = diag(1, 1, 1, β, 1, 1).

Points are 4x4 homogeneous matrices. Tangent vectors at g are stored as the
six coefficients of the body velocity g⁻¹ġ on the G-orthonormal basis
e1..e6 of se(3) (three rotations scaled by 1/√2, translation along x scaled
by 1/√β, translations along y and z). The metric is then the dot product of
coefficients, and every left-invariant tensor (Christoffels, curvature, ∇R)
is a constant array in these coordinates.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .core import DEFAULT_TOLERANCES, Manifold
from .exceptions import BetaNotOne, InvalidInput, NonPositiveBeta

SQRT2 = np.sqrt(2.0)
_ROT_SKEW = (((2, 1), (1, 2)), ((0, 2), (2, 0)), ((1, 0), (0, 1)))  # (+, -) entries of Lx, Ly, Lz


def _check_beta(beta):
    beta = float(beta)
    if not beta > 0 or not np.isfinite(beta):
        raise NonPositiveBeta(f"beta must be a positive real, got {beta}")
    return beta


def hat3(w):
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def vee3(A):
    return np.array([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]]) * 0.5


def so3_exp(w):
    """Rodrigues formula."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w)
    K = hat3(w)
    if theta < 1e-6:
        a = 1.0 - theta**2 / 6.0 + theta**4 / 120.0
        b = 0.5 - theta**2 / 24.0 + theta**4 / 720.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def so3_log(R):
    """Rotation vector w with so3_exp(w) = R, for rotation angles in [0, π)."""
    R = np.asarray(R, dtype=float)
    s_vec = vee3(R)  # sin(theta) * axis
    s = np.linalg.norm(s_vec)
    c = 0.5 * (np.trace(R) - 1.0)
    theta = np.arctan2(s, c)
    if theta < 1e-6:
        return s_vec * (1.0 + theta**2 / 6.0 + 7.0 * theta**4 / 360.0)
    if np.pi - theta < 1e-6:
        # near π the skew part vanishes; recover the axis from R + I
        B = 0.5 * (R + np.eye(3))
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / np.sqrt(max(B[k, k], 1e-300))
        axis /= np.linalg.norm(axis)
        if np.dot(axis, s_vec) < 0:
            axis = -axis
        return theta * axis
    return s_vec * (theta / s)


def basis_matrices(beta):
    beta = _check_beta(beta)
    E = np.zeros((6, 4, 4))
    for a, ((ip, jp), (im, jm)) in enumerate(_ROT_SKEW):
        E[a, ip, jp] = 1.0 / SQRT2
        E[a, im, jm] = -1.0 / SQRT2
    E[3, 0, 3] = 1.0 / np.sqrt(beta)
    E[4, 1, 3] = 1.0
    E[5, 2, 3] = 1.0
    return E


def algebra_coords(M, beta):
    """Coefficients on e1..e6 of the se(3) part of a 4x4 matrix (skew rotation block + translation)."""
    w = vee3(M[:3, :3])
    t = M[:3, 3]
    return np.array([SQRT2 * w[0], SQRT2 * w[1], SQRT2 * w[2], np.sqrt(beta) * t[0], t[1], t[2]])


def algebra_hat(xi, beta):
    return np.tensordot(xi, basis_matrices(beta), axes=1)


def _split(xi, beta):
    """Body coefficients -> (rotation vector, translation vector) in matrix units."""
    return xi[:3] / SQRT2, np.array([xi[3] / np.sqrt(beta), xi[4], xi[5]])


def _join(w, t, beta):
    return np.array([SQRT2 * w[0], SQRT2 * w[1], SQRT2 * w[2], np.sqrt(beta) * t[0], t[1], t[2]])


@dataclass(frozen=True)
class StructureTable:
    """C[i, j, k] = <[e_i, e_j], e_k>."""

    C: np.ndarray
    beta: float

    @property
    def tau(self):
        return np.sqrt(self.beta) + 1.0 / np.sqrt(self.beta)


@dataclass(frozen=True)
class ChristoffelTable:
    """gamma[i, j, k] = <∇_{e_i} e_j, e_k>."""

    gamma: np.ndarray
    beta: float


@lru_cache(maxsize=64)
def _structure(beta):
    E = basis_matrices(beta)
    C = np.zeros((6, 6, 6))
    for i in range(6):
        for j in range(6):
            C[i, j] = algebra_coords(E[i] @ E[j] - E[j] @ E[i], beta)
    C[np.abs(C) < 1e-15] = 0.0
    C.setflags(write=False)
    return C


def structure_constants(beta):
    beta = _check_beta(beta)
    return StructureTable(_structure(beta), beta)


@lru_cache(maxsize=64)
def _christoffels(beta):
    C = _structure(beta)
    # Γ_ij^k = ½ (C_ij^k - C_jk^i + C_ki^j)
    G = 0.5 * (C - np.einsum("jki->ijk", C) + np.einsum("kij->ijk", C))
    G.setflags(write=False)
    return G


def christoffels(beta):
    beta = _check_beta(beta)
    return ChristoffelTable(_christoffels(beta), beta)


@lru_cache(maxsize=64)
def _curvature_tables(beta):
    C = _structure(beta)
    G = _christoffels(beta)
    # R(e_i, e_j)e_k = ∇_i ∇_j e_k - ∇_j ∇_i e_k - ∇_[e_i, e_j] e_k
    R = (
        np.einsum("jkm,imn->ijkn", G, G)
        - np.einsum("ikm,jmn->ijkn", G, G)
        - np.einsum("ijm,mkn->ijkn", C, G)
    )
    # (∇_i R)(e_j, e_k)e_l = ∇_i(R(j,k)l) - R(∇_i j, k)l - R(j, ∇_i k)l - R(j, k)∇_i l
    N = (
        np.einsum("jklm,imn->ijkln", R, G)
        - np.einsum("ijm,mkln->ijkln", G, R)
        - np.einsum("ikm,jmln->ijkln", G, R)
        - np.einsum("ilm,jkmn->ijkln", G, R)
    )
    R.setflags(write=False)
    N.setflags(write=False)
    return R, N


def curvature_tensor(beta):
    """Array R[i, j, k, :] = coefficients of R(e_i, e_j)e_k."""
    return _curvature_tables(_check_beta(beta))[0]


def nabla_curvature_tensor(beta):
    """Array N[i, j, k, l, :] = coefficients of (∇_{e_i} R)(e_j, e_k)e_l."""
    return _curvature_tables(_check_beta(beta))[1]


def curvature_at_identity(beta, i, j, k):
    return curvature_tensor(beta)[i, j, k].copy()


def nabla_curvature_at_identity(beta, i, j, k, l):
    return nabla_curvature_tensor(beta)[i, j, k, l].copy()


# Witness of ∇R ≠ 0 for β ≠ 1. The chain of equalities behind the closed form
# is written for the tuple (3, 3, 2, 4); the conclusion names (3, 3, 1, 4).
# Both are reported, 1-based as (derivative direction, j, k, l).
WITNESS_TUPLES = ((3, 3, 2, 4), (3, 3, 1, 4))


def witness_values(beta):
    N = nabla_curvature_tensor(beta)
    return {
        f"(nabla_e{i} R)(e{j}, e{k})e{l}": N[i - 1, j - 1, k - 1, l - 1].copy()
        for i, j, k, l in WITNESS_TUPLES
    }


def witness_expected(beta):
    """Closed-form e6 coefficient -τ/(4√2)(1 - τ²/4)."""
    beta = _check_beta(beta)
    tau = np.sqrt(beta) + 1.0 / np.sqrt(beta)
    return float(-tau / (4.0 * SQRT2) * (1.0 - tau**2 / 4.0))


def ad_star(a, c, beta):
    """Co-adjoint action: (ad*_a c)_j = Σ_ik a_i c_k C_ij^k."""
    return np.einsum("i,ijk,k->j", a, _structure(_check_beta(beta)), c)


def lie_bracket(a, b, beta):
    return np.einsum("i,j,ijk->k", a, b, _structure(_check_beta(beta)))


def geodesic_rhs(gamma, X, beta):
    """Euler–Poincaré right-hand side: (γ X̂, ad*_X X)."""
    beta = _check_beta(beta)
    return np.asarray(gamma) @ algebra_hat(X, beta), ad_star(X, X, beta)


def _require_beta1(beta):
    if beta != 1.0:
        raise BetaNotOne(f"closed-form geodesics need beta = 1, got {beta}")


def se3_exp_beta1(x, v, beta=1.0):
    """Riemannian exponential of the product metric: (R, p) ↦ (R exp(Ω_b), p + R t_b)."""
    _require_beta1(beta)
    x = np.asarray(x, dtype=float)
    w, t = _split(np.asarray(v, dtype=float), beta)
    R, p = x[:3, :3], x[:3, 3]
    out = np.eye(4)
    out[:3, :3] = R @ so3_exp(w)
    out[:3, 3] = p + R @ t
    return out


def se3_log_beta1(x, y, beta=1.0):
    _require_beta1(beta)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    R, p = x[:3, :3], x[:3, 3]
    w = so3_log(R.T @ y[:3, :3])
    t = R.T @ (y[:3, 3] - p)
    return _join(w, t, beta)


def se3_transport_beta1(x, w, v, t=1.0, beta=1.0):
    """Product-metric transport of body coefficients ``v`` along exp_x(s w).

    The rotation part is conjugated by exp(-tΩ/2) (bi-invariant SO(3)), the
    translation part is fixed in space, i.e. rotated by exp(-tΩ) in the body frame.
    """
    _require_beta1(beta)
    ww, _ = _split(np.asarray(w, dtype=float), beta)
    vw, vt = _split(np.asarray(v, dtype=float), beta)
    return _join(so3_exp(-0.5 * t * ww) @ vw, so3_exp(-t * ww) @ vt, beta)


class SE3(Manifold):
    name = "se3"
    dim = 6
    safe_radius = 1.0
    has_nabla_riemann = True

    def __init__(self, beta=1.0, tol=DEFAULT_TOLERANCES):
        super().__init__(tol)
        self.beta = _check_beta(beta)
        self.basis = basis_matrices(self.beta)
        self.C = _structure(self.beta)
        self.gamma = _christoffels(self.beta)
        self._R, self._N = _curvature_tables(self.beta)

    @property
    def has_closed_form(self):
        return self.beta == 1.0

    @property
    def tau(self):
        return np.sqrt(self.beta) + 1.0 / np.sqrt(self.beta)

    def __repr__(self):
        return f"SE3(beta={self.beta})"

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def exp(self, x, v):
        return se3_exp_beta1(x, v, self.beta)

    def log(self, x, y):
        return se3_log_beta1(x, y, self.beta)

    def transport(self, x, w, v, t=1.0):
        return se3_transport_beta1(x, w, v, t, self.beta)

    def dist(self, x, y):
        if self.has_closed_form:
            return self.norm(x, self.log(x, y))
        raise BetaNotOne("no closed-form distance for beta != 1")

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (4, 4):
            raise InvalidInput("SE(3) points are 4x4 homogeneous matrices")
        R = x[:3, :3]
        tol = self.tol.tol_point
        if (
            np.max(np.abs(R.T @ R - np.eye(3))) > tol
            or abs(np.linalg.det(R) - 1.0) > tol
            or np.max(np.abs(x[3] - (0.0, 0.0, 0.0, 1.0))) > tol
        ):
            raise InvalidInput("not a rigid transformation")
        return x

    def check_tangent(self, x, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (6,):
            raise InvalidInput("SE(3) tangent vectors are 6 body-velocity coefficients")
        return v

    def project(self, x, v):
        return np.asarray(v, dtype=float)

    def ambient_to_tangent(self, x, delta):
        return algebra_coords(np.linalg.solve(x, delta), self.beta)

    def ambient(self, x, v):
        """Matrix form x·v̂ of a tangent vector."""
        return np.asarray(x) @ algebra_hat(v, self.beta)

    def riemann(self, x, u, v, w):
        # contract through the bivector u∧v so that swapping u and v flips the sign exactly
        B = np.outer(u, v) - np.outer(v, u)
        return 0.5 * np.einsum("ij,k,ijkn->n", B, w, self._R)

    def nabla_riemann(self, x, u, v, w, z):
        return np.einsum("i,j,k,l,ijkln->n", u, v, w, z, self._N)

    def ad_star(self, a, c):
        return np.einsum("i,ijk,k->j", a, self.C, c)

    def pack(self, x, v):
        return np.concatenate((np.ravel(x), v)).astype(float)

    def unpack(self, y):
        return y[:16].reshape(4, 4).copy(), y[16:].copy()

    def geodesic_rhs(self, y):
        return kernels.se3_rhs(np.asarray(y, dtype=float), self.C, self.basis)

    def rk_step(self, y, h):
        return kernels.rk4_se3(y, float(h), self.C, self.basis)

    def chart(self, x):
        return np.asarray(x, dtype=float)[:3, :].ravel()

    def to_coords(self, x, v):
        return np.asarray(v, dtype=float)

    def from_coords(self, x, c):
        return np.asarray(c, dtype=float)

    def zero_tangent(self, x):
        return np.zeros(6)

    def random_point(self, rng):
        out = np.eye(4)
        out[:3, :3] = so3_exp(rng.uniform(-1.0, 1.0, 3))
        out[:3, 3] = rng.standard_normal(3)
        return out
