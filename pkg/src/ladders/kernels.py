"""RK4 kernels for the geodesic equations.

Every kernel exists twice: a loop version compiled with numba and a
vectorised numpy version. ``rk4_sphere``, ``rk4_spd`` and ``rk4_se3`` are
bound to one or the other according to ``ladders._accel.USE_NUMBA``; both
families stay importable for benchmarking and cross-checks.

State layouts (flat float64 arrays):

* sphere: ``[x (3), v (3)]``, ambient position and velocity; x is
  renormalised and v made tangent after each step
* SPD(3): ``[S (9), V (9)]``, row-major matrices
* SE(3):  ``[g (16), X (6)]``, homogeneous matrix and body velocity
  coefficients on the orthonormal Lie algebra basis
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# numpy versions
# ---------------------------------------------------------------------------


def sphere_rhs_numpy(y):
    x, v = y[:3], y[3:]
    return np.concatenate((v, -(v @ v) * x))


def spd_rhs_numpy(y):
    S = y[:9].reshape(3, 3)
    V = y[9:].reshape(3, 3)
    return np.concatenate((V.ravel(), (V @ np.linalg.solve(S, V)).ravel()))


def se3_rhs_numpy(y, C, basis):
    g = y[:16].reshape(4, 4)
    X = y[16:]
    xi_hat = np.tensordot(X, basis, axes=1)
    return np.concatenate(((g @ xi_hat).ravel(), np.einsum("i,ijk,k->j", X, C, X)))


def _rk4_numpy(rhs, y, h, *args):
    k1 = rhs(y, *args)
    k2 = rhs(y + 0.5 * h * k1, *args)
    k3 = rhs(y + 0.5 * h * k2, *args)
    k4 = rhs(y + h * k3, *args)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def project_se3_numpy(y):
    out = y.copy()
    g = out[:16].reshape(4, 4)
    u, _, vt = np.linalg.svd(g[:3, :3])
    g[:3, :3] = u @ vt
    g[3] = (0.0, 0.0, 0.0, 1.0)
    return out


def project_sphere_numpy(y):
    x = y[:3] / np.sqrt(y[:3] @ y[:3])
    v = y[3:] - (y[3:] @ x) * x
    return np.concatenate((x, v))


def rk4_sphere_numpy(y, h):
    return project_sphere_numpy(_rk4_numpy(sphere_rhs_numpy, y, h))


def rk4_spd_numpy(y, h):
    out = _rk4_numpy(spd_rhs_numpy, y, h)
    S = out[:9].reshape(3, 3)
    S[...] = 0.5 * (S + S.T)
    V = out[9:].reshape(3, 3)
    V[...] = 0.5 * (V + V.T)
    return out


def rk4_se3_numpy(y, h, C, basis):
    return project_se3_numpy(_rk4_numpy(se3_rhs_numpy, y, h, C, basis))


# ---------------------------------------------------------------------------
# numba versions
# ---------------------------------------------------------------------------


@njit
def sphere_rhs_numba(y):
    out = np.empty(6)
    vv = y[3] * y[3] + y[4] * y[4] + y[5] * y[5]
    for i in range(3):
        out[i] = y[3 + i]
        out[3 + i] = -vv * y[i]
    return out


@njit
def rk4_sphere_numba(y, h):
    k1 = sphere_rhs_numba(y)
    k2 = sphere_rhs_numba(y + 0.5 * h * k1)
    k3 = sphere_rhs_numba(y + 0.5 * h * k2)
    k4 = sphere_rhs_numba(y + h * k3)
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # back onto the sphere and its tangent plane
    r = np.sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2])
    xv = 0.0
    for i in range(3):
        out[i] /= r
        xv += out[i] * out[3 + i]
    for i in range(3):
        out[3 + i] -= xv * out[i]
    return out


@njit
def _solve3(S, V):
    # S^{-1} V by the adjugate; S is SPD and 3x3
    inv = np.empty((3, 3))
    inv[0, 0] = S[1, 1] * S[2, 2] - S[1, 2] * S[2, 1]
    inv[0, 1] = S[0, 2] * S[2, 1] - S[0, 1] * S[2, 2]
    inv[0, 2] = S[0, 1] * S[1, 2] - S[0, 2] * S[1, 1]
    inv[1, 0] = S[1, 2] * S[2, 0] - S[1, 0] * S[2, 2]
    inv[1, 1] = S[0, 0] * S[2, 2] - S[0, 2] * S[2, 0]
    inv[1, 2] = S[0, 2] * S[1, 0] - S[0, 0] * S[1, 2]
    inv[2, 0] = S[1, 0] * S[2, 1] - S[1, 1] * S[2, 0]
    inv[2, 1] = S[0, 1] * S[2, 0] - S[0, 0] * S[2, 1]
    inv[2, 2] = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    det = S[0, 0] * inv[0, 0] + S[0, 1] * inv[1, 0] + S[0, 2] * inv[2, 0]
    out = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            acc = 0.0
            for k in range(3):
                acc += inv[i, k] * V[k, j]
            out[i, j] = acc / det
    return out


@njit
def spd_rhs_numba(y):
    S = y[:9].copy().reshape(3, 3)
    V = y[9:].copy().reshape(3, 3)
    W = _solve3(S, V)
    out = np.empty(18)
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = V[i, j]
            acc = 0.0
            for k in range(3):
                acc += V[i, k] * W[k, j]
            out[9 + 3 * i + j] = acc
    return out


@njit
def rk4_spd_numba(y, h):
    k1 = spd_rhs_numba(y)
    k2 = spd_rhs_numba(y + 0.5 * h * k1)
    k3 = spd_rhs_numba(y + 0.5 * h * k2)
    k4 = spd_rhs_numba(y + h * k3)
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    for off in (0, 9):
        for i in range(3):
            for j in range(i + 1, 3):
                m = 0.5 * (out[off + 3 * i + j] + out[off + 3 * j + i])
                out[off + 3 * i + j] = m
                out[off + 3 * j + i] = m
    return out


@njit
def se3_rhs_numba(y, C, basis):
    out = np.empty(22)
    xi_hat = np.zeros((4, 4))
    for a in range(6):
        xa = y[16 + a]
        if xa != 0.0:
            for i in range(4):
                for j in range(4):
                    xi_hat[i, j] += xa * basis[a, i, j]
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += y[4 * i + k] * xi_hat[k, j]
            out[4 * i + j] = acc
    for j in range(6):
        acc = 0.0
        for i in range(6):
            xi = y[16 + i]
            if xi != 0.0:
                for k in range(6):
                    acc += xi * C[i, j, k] * y[16 + k]
        out[16 + j] = acc
    return out


@njit
def project_se3_numba(y):
    out = y.copy()
    R = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            R[i, j] = out[4 * i + j]
    u, _, vt = np.linalg.svd(R)
    Q = u @ vt
    for i in range(3):
        for j in range(3):
            out[4 * i + j] = Q[i, j]
    out[12] = 0.0
    out[13] = 0.0
    out[14] = 0.0
    out[15] = 1.0
    return out


@njit
def rk4_se3_numba(y, h, C, basis):
    k1 = se3_rhs_numba(y, C, basis)
    k2 = se3_rhs_numba(y + 0.5 * h * k1, C, basis)
    k3 = se3_rhs_numba(y + 0.5 * h * k2, C, basis)
    k4 = se3_rhs_numba(y + h * k3, C, basis)
    return project_se3_numba(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


if USE_NUMBA:
    sphere_rhs, spd_rhs, se3_rhs = sphere_rhs_numba, spd_rhs_numba, se3_rhs_numba
    rk4_sphere, rk4_spd, rk4_se3 = rk4_sphere_numba, rk4_spd_numba, rk4_se3_numba
else:
    sphere_rhs, spd_rhs, se3_rhs = sphere_rhs_numpy, spd_rhs_numpy, se3_rhs_numpy
    rk4_sphere, rk4_spd, rk4_se3 = rk4_sphere_numpy, rk4_spd_numpy, rk4_se3_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
