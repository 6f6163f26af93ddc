import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ladders import SE3, SPD, Sphere, ToleranceConfig
from ladders.exceptions import BetaNotOne, InvalidInput, LadderDiverged, ShootingDiverged
from ladders.ladders import (
    ClosedForm,
    FineGeodesics,
    LadderConfig,
    averaged_schild_step,
    fanning_step,
    pole_step,
    schild_step,
    transport,
    transport_reference,
)
from ladders.lab import fit_slope

from oracles import se3_transport_ode

NORTH = np.array([0.0, 0.0, 1.0])
E = np.eye(6)


def back_transport(M, x, w, u):
    """Carry u from exp_x(w) back to x along the same geodesic."""
    x_w = M.exp(x, w)
    return M.transport(x_w, -M.transport(x, w, w), u)


def order(ts, errs):
    return fit_slope(ts, errs).slope


def generic_pair(M, rng, x):
    v = M.random_tangent(rng, x, 1.0)
    w = M.random_tangent(rng, x, 1.0)
    return v, w


# --- elementary steps -------------------------------------------------------


@pytest.mark.parametrize("step", [schild_step, pole_step, averaged_schild_step])
def test_zero_vector_maps_to_zero(closed_manifold, rng, step):
    M = closed_manifold
    x = M.random_point(rng)
    w = M.random_tangent(rng, x, 0.4)
    u = step(M, x, w, M.zero_tangent(x))
    assert M.norm(M.exp(x, w), u) <= 1e-10


def test_fanning_zero_vector(closed_manifold, rng):
    M = closed_manifold
    x = M.random_point(rng)
    w = M.random_tangent(rng, x, 0.4)
    u = fanning_step(M, x, w, M.zero_tangent(x), 0.1, 0.1)
    assert M.norm(M.exp(x, 0.1 * w), u) <= 1e-10


def test_schild_degenerate_v_equals_w(rng):
    M = Sphere()
    for _ in range(5):
        x = M.random_point(rng)
        w = M.random_tangent(rng, x, rng.uniform(0.1, 1.2))
        u = schild_step(M, x, w, w.copy())
        assert np.allclose(u, M.transport(x, w, w), atol=1e-10)


def test_pole_exact_on_symmetric_spaces(closed_manifold, rng):
    M = closed_manifold
    worst = 0.0
    for _ in range(20):
        x = M.random_point(rng)
        w = M.random_tangent(rng, x, rng.uniform(0.1, 1.0))
        v = M.random_tangent(rng, x, rng.uniform(0.1, 1.0))
        u = pole_step(M, x, w, v)
        ref = M.transport(x, w, v)
        worst = max(worst, M.norm(M.exp(x, w), u - ref) / M.norm(x, v))
    assert worst <= 1e-10


def test_averaged_is_half_difference(closed_manifold, rng):
    M = closed_manifold
    x = M.random_point(rng)
    v, w = generic_pair(M, rng, x)
    v, w = 0.3 * v, 0.3 * w
    avg = averaged_schild_step(M, x, w, v)
    assert np.array_equal(avg, 0.5 * (schild_step(M, x, w, v) - schild_step(M, x, w, -v)))


@pytest.mark.parametrize("make", [Sphere, SPD])
def test_schild_single_step_matches_curvature_term(make, rng):
    M = make()
    x = M.random_point(rng)
    v0, w0 = generic_pair(M, rng, x)
    pred = 0.5 * M.riemann(x, w0, v0, v0)
    ts = np.array([0.2, 0.1, 0.05, 0.025])
    resid, raw = [], []
    for t in ts:
        u = schild_step(M, x, t * w0, t * v0)
        back = back_transport(M, x, t * w0, u)
        raw.append(M.norm(x, back - t * v0))
        resid.append(M.norm(x, back - t * v0 - t ** 3 * pred))
    assert order(ts, resid) >= 3.5
    assert abs(order(ts, raw) - 3.0) < 0.2


def test_averaged_schild_single_step_order(rng):
    M = Sphere()
    x = M.random_point(rng)
    v0, w0 = generic_pair(M, rng, x)
    ts = np.array([0.2, 0.1, 0.05, 0.025])
    errs = []
    for t in ts:
        u = averaged_schild_step(M, x, t * w0, t * v0)
        errs.append(M.norm(M.exp(x, t * w0), u - M.transport(x, t * w0, t * v0)))
    assert order(ts, errs) >= 4.5


@pytest.mark.slow
def test_pole_single_step_order_se3_beta2():
    M = SE3(2.0)
    x = np.eye(4)
    v0 = np.array([0.3, -0.2, 0.5, 0.7, -0.1, 0.4])
    w0 = np.array([-0.2, 0.6, 0.4, 0.1, 0.5, -0.3])
    B = FineGeodesics(M, 64)
    ts = np.array([0.2, 0.1, 0.05])
    errs = []
    for t in ts:
        u = pole_step(M, x, t * w0, t * v0, B)
        _, ref = se3_transport_ode(M, x, t * w0, t * v0, 200)
        errs.append(np.linalg.norm(u - ref))
    assert order(ts, errs) >= 3.5


def test_fanning_flat_commuting_directions_exact():
    M = SPD()
    x = np.eye(3)
    w = np.diag([0.3, -0.1, 0.2])
    v = np.diag([-0.4, 0.5, 0.1])
    for h in (0.5, 0.1):
        u = fanning_step(M, x, w, v, h, h)
        ref = M.transport(x, h * w, v)
        # only the finite-difference error of a scalar exponential remains
        assert np.max(np.abs(u - ref)) <= 2 * h ** 2 * np.max(np.abs(v)) ** 3


@pytest.mark.parametrize("central", [True, False])
def test_fanning_curvature_term_sphere(central):
    M = Sphere()
    v = np.array([1.0, 0.0, 0.0])
    w = np.array([0.0, 1.0, 0.0])
    assert np.linalg.norm(M.riemann(NORTH, w, v, w)) == pytest.approx(1.0)
    for h in (0.05, 0.02, 0.01):
        u = fanning_step(M, NORTH, w, v, h, h, central=central)
        dev = np.linalg.norm(u - M.transport(NORTH, h * w, v))
        assert dev * 6 / h ** 2 == pytest.approx(1.0, rel=0.1)


def test_closed_backend_rejects_anisotropic_se3():
    with pytest.raises(BetaNotOne):
        ClosedForm(SE3(2.0))


# --- iterated transport -----------------------------------------------------


@pytest.mark.parametrize("scheme,step", [("schild", schild_step), ("pole", pole_step),
                                         ("averaged", averaged_schild_step)])
def test_single_rung_reduces_to_step(closed_manifold, rng, scheme, step):
    M = closed_manifold
    x = M.random_point(rng)
    v, w = generic_pair(M, rng, x)
    v, w = 0.4 * v, 0.4 * w
    res = transport(M, x, w, v, scheme=scheme, n=1)
    assert np.allclose(res.transported.vec, step(M, x, w, v), atol=1e-12)
    assert np.allclose(res.endpoint, M.exp(x, w), atol=1e-12)


def test_schild_longitudinal_error_sphere():
    M = Sphere()
    v = np.array([0.0, 1.0, 0.0])
    w = np.array([1.0, 0.0, 0.0])
    for n in (50, 100):
        res = transport(M, NORTH, w, v, scheme="schild", n=n)
        ref = M.transport(NORTH, w, v)
        long = M.inner(res.endpoint, res.transported.vec - ref, res.main_velocity)
        assert long == pytest.approx(0.5 / n ** 2, rel=0.05)


def test_infinitesimal_pole_matches_closed_se3_beta1():
    M = SE3(1.0)
    x = np.eye(4)
    w = np.array([0.2, -0.4, 0.5, 0.3, 0.1, -0.2])
    v = np.array([0.1, 0.3, -0.2, 0.5, -0.4, 0.2])
    ref = M.transport(x, w, v)
    ns = np.array([5, 10, 20, 40])
    diffs = []
    for n in ns:
        res = transport(M, x, w, v, scheme="pole", n=int(n), backend="infinitesimal")
        diffs.append(np.linalg.norm(res.transported.vec - ref))
    diffs = np.array(diffs)
    assert np.all(diffs * ns ** 2 <= 1e-2)
    assert order(ns, diffs) <= -2 + 0.1


def test_reference_delegates_to_closed_form(closed_manifold, rng):
    M = closed_manifold
    x = M.random_point(rng)
    v, w = generic_pair(M, rng, x)
    ref = transport_reference(M, x, w, v)
    assert np.array_equal(ref.vec, M.transport(x, w, v))
    assert np.allclose(ref.base, M.exp(x, w))


def test_reference_agrees_with_transport_ode():
    M = SE3(2.0)
    x = np.eye(4)
    w, v = E[2], E[3]
    _, ode = se3_transport_ode(M, x, w, v)
    ref = transport_reference(M, x, w, v, n_max=80)
    assert np.linalg.norm(ref.vec - ode) <= 1e-7


@pytest.mark.slow
def test_reference_self_consistent_beta2():
    M = SE3(2.0)
    x = np.eye(4)
    w, v = E[2], E[3]
    n_max = 40
    coarse = transport_reference(M, x, w, v, n_max=n_max)
    fine = transport_reference(M, x, w, v, n_max=2 * n_max)
    # smallest error the experiment would report, at n = n_max
    res = transport(M, x, w, v, scheme="pole", n=n_max, backend="infinitesimal")
    reported = np.linalg.norm(res.transported.vec - fine.vec)
    assert np.linalg.norm(coarse.vec - fine.vec) <= reported / 10


@pytest.mark.parametrize("make", [Sphere, SPD])
@pytest.mark.parametrize("scheme", ["schild", "pole", "averaged", "fanning"])
def test_homogeneity(make, scheme, rng):
    M = make()
    x = M.random_point(rng)
    v, w = generic_pair(M, rng, x)
    v = 0.5 * v

    def defect(n, c):
        a = transport(M, x, w, c * v, scheme=scheme, n=n).transported.vec
        b = transport(M, x, w, v, scheme=scheme, n=n).transported.vec
        return M.norm(M.exp(x, w), a - c * b) / M.norm(x, v)

    cs = (-2.0, -0.5, 1.5, 2.0)
    K = 2 * max(defect(10, c) for c in cs) * 10 ** 2
    for n in (20, 40):
        for c in cs:
            assert defect(n, c) <= K / n ** 2 + 1e-10


@pytest.mark.parametrize("make", [Sphere, SPD])
@pytest.mark.parametrize("scheme,alpha", [("schild", 2.0), ("schild", 1.5), ("pole", 1.0),
                                          ("averaged", 2.0), ("fanning", 2.0)])
def test_norm_drift(make, scheme, alpha, rng):
    M = make()
    x = M.random_point(rng)
    v, w = generic_pair(M, rng, x)
    nv = M.norm(x, v)

    def drift(n):
        res = transport(M, x, w, v, scheme=scheme, n=n, alpha=alpha)
        return abs(M.norm(res.endpoint, res.transported.vec) - nv)

    p = min(alpha, 2.0) if scheme != "fanning" else 1.0
    C = 2 * drift(10) * 10 ** p
    for n in (20, 40, 80):
        assert drift(n) <= C / n ** p + 1e-9 * nv


def test_fanning_first_order_sphere():
    M = Sphere()
    v = np.array([0.0, 1.0, 0.0])
    w = np.array([1.0, 0.0, 0.0])
    ref = M.transport(NORTH, w, v)
    ns = np.array([20, 40, 80, 160])
    errs = [np.linalg.norm(transport(M, NORTH, w, v, scheme="fanning", n=int(n)).transported.vec - ref)
            for n in ns]
    assert abs(order(ns, errs) + 1.0) <= 0.1


def test_call_counts():
    M = SE3(2.0)
    x = np.eye(4)
    res = transport(M, x, E[2], E[3], scheme="fanning", n=7, backend="infinitesimal")
    assert res.rk_calls == 21
    closed = transport(Sphere(), NORTH, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), scheme="schild", n=7)
    assert closed.rk_calls == 0
    pole = transport(M, x, E[2], E[3], scheme="pole", n=7, backend="infinitesimal")
    assert 7 * 7 <= pole.rk_calls <= 7 * 40


class _BrokenSphere(Sphere):
    """Inflated logarithm: every rung amplifies the transported vector."""

    def log(self, x, y):
        return 3.0 * super().log(x, y)


def test_divergence_guard_reports_rung():
    M = _BrokenSphere()
    with pytest.raises(LadderDiverged) as info:
        transport(M, NORTH, np.array([0.0, 0.8, 0.0]), np.array([0.3, 0.0, 0.0]), scheme="schild", n=10)
    assert info.value.rung == 0


def test_shooting_failure_carries_rung():
    M = SE3(2.0, tol=ToleranceConfig(max_gd_iters=1))
    with pytest.raises(ShootingDiverged) as info:
        transport(M, np.eye(4), E[2], E[3], scheme="pole", n=5, backend="infinitesimal")
    assert info.value.rung == 0
    assert info.value.best_residual is not None


def test_ladder_config_validation():
    assert LadderConfig("schild").alpha == 2.0
    assert LadderConfig("pole").alpha == 1.0
    assert LadderConfig("averaged").scheme == "averaged_schild"
    assert LadderConfig("fanning", alpha=1.0).alpha == 2.0
    assert LadderConfig(backend="closed").backend == "closed_form"
    for bad in (dict(n=0), dict(n=2.5), dict(alpha=0.5), dict(alpha=2.5), dict(scheme="ladder"),
                dict(backend="euler")):
        with pytest.raises(InvalidInput):
            LadderConfig(**bad)


def test_closed_backend_needs_closed_form():
    with pytest.raises(BetaNotOne):
        transport(SE3(1.5), np.eye(4), E[2], E[3], scheme="pole", n=4)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.2, 1.2), st.floats(-1.2, 1.2), st.floats(0.1, 1.0), st.integers(1, 12))
def test_pole_transport_exact_on_sphere(a, b, c, n):
    M = Sphere()
    w = np.array([a, b, 0.0])
    v = np.array([c, -a, 0.0])
    res = transport(M, NORTH, w, v, scheme="pole", n=n)
    assert np.allclose(res.transported.vec, M.transport(NORTH, w, v), atol=1e-9)
