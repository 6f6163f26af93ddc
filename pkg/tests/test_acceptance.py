"""Acceptance suite: one test per criterion; a PASS/FAIL line for each is
printed in the terminal summary (see conftest.py)."""

import numpy as np
import pytest

from ladders import SE3, SPD, Sphere
from ladders import se3 as se3mod
from ladders.lab import ExperimentSpec, fit_linear, fit_slope, run_experiment
from ladders.ladders import averaged_schild_step, pole_step, schild_step, transport
from ladders.ode import integrate_geodesic

FULL_GRID = (5, 10, 20, 40, 80, 160, 320)  # the fits drop 5 and 10
E = np.eye(6)


@pytest.fixture
def criterion(record_property):
    def tag(label):
        record_property("criterion", label)
    return tag


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_sphere_longitudinal_coefficient(criterion, alpha):
    criterion("1: sphere longitudinal coefficient 1/2")
    report = run_experiment(ExperimentSpec("sphere", "schild", alpha, n_grid=FULL_GRID))
    fit = report.fit
    print(f"alpha={alpha}: long_coef={fit.long_coef:.5f} r2={fit.long_r_squared:.6f}")
    assert fit.long_coef == pytest.approx(0.5, rel=0.05)
    assert fit.long_r_squared >= 0.999


@pytest.mark.parametrize("alpha", [1.0, 1.5, 2.0])
def test_schild_order_sweep(criterion, alpha):
    criterion("2: Schild order sweep on the sphere")
    report = run_experiment(ExperimentSpec("sphere", "schild", alpha, n_grid=FULL_GRID))
    print(f"alpha={alpha}: slope={report.fit.slope:.4f}")
    assert abs(report.fit.slope + alpha) <= 0.1


def test_spd_longitudinal_sign(criterion):
    criterion("3: SPD longitudinal error negative and linear in n^-2")
    report = run_experiment(ExperimentSpec("spd", "schild", 2.0, n_grid=FULL_GRID))
    fit = report.fit
    print(f"long_coef={fit.long_coef:.5f} r2={fit.long_r_squared:.6f}")
    assert fit.long_r_squared >= 0.99
    assert fit.long_coef < 0


@pytest.mark.parametrize("make", [Sphere, SPD, lambda: SE3(1.0)], ids=["sphere", "spd", "se3_beta1"])
def test_pole_exact_on_symmetric_spaces(criterion, make):
    criterion("4: pole rung exact on symmetric spaces")
    M = make()
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(20):
        x = M.random_point(rng)
        w = M.random_tangent(rng, x, rng.uniform(0.05, 1.0))
        v = M.random_tangent(rng, x, rng.uniform(0.05, 1.0))
        u = pole_step(M, x, w, v)
        worst = max(worst, M.norm(M.exp(x, w), u - M.transport(x, w, v)))
    print(f"worst deviation {worst:.2e}")
    assert worst <= 1e-10


def test_se3_symmetry_criterion(criterion):
    criterion("5: SE(3) locally symmetric iff beta = 1")
    N1 = se3mod.nabla_curvature_tensor(1.0)
    assert N1.shape[:4] == (6, 6, 6, 6)  # 1296 tuples
    assert np.max(np.abs(N1)) <= 1e-12
    beta = 2.0
    tau = np.sqrt(beta) + 1.0 / np.sqrt(beta)
    expected = -tau / (4 * np.sqrt(2.0)) * (1 - tau ** 2 / 4)
    N2 = se3mod.nabla_curvature_tensor(beta)
    witness = N2[2, 2, 1, 3]  # (∇_{e3} R)(e3, e2) e4, zero-based indices
    target = np.zeros(6)
    target[5] = expected
    print(f"witness e6 coefficient {witness[5]!r}, expected {expected!r}")
    assert np.max(np.abs(witness - target)) <= 1e-12
    assert np.max(np.abs(N2)) > 1e-3


def test_infinitesimal_pole_quadratic(criterion):
    criterion("6: infinitesimal pole ladder quadratic on SE(3)")
    coefs = {}
    for beta in (1.5, 2.0, 3.0):
        report = run_experiment(ExperimentSpec("se3", "pole", backend="infinitesimal", beta=beta,
                                               n_grid=FULL_GRID))
        n = report.column("n")[-1]
        coefs[beta] = report.column("abs_error")[-1] * n ** 2
        print(f"beta={beta}: slope={report.fit.slope:.4f} n^2 coef={coefs[beta]:.5f}")
        assert abs(report.fit.slope + 2.0) <= 0.1
    assert coefs[1.5] < coefs[2.0] < coefs[3.0]
    # at beta = 1 the n^-2 term is absent; what remains is the RK4 floor
    flat = run_experiment(ExperimentSpec("se3", "pole", backend="infinitesimal", beta=1.0, n_grid=FULL_GRID))
    errs = flat.column("abs_error")
    ns = flat.column("n")
    print(f"beta=1: errors {errs}, slope={flat.fit.slope:.3f}")
    assert np.all(errs[ns >= 20] <= 1e-7)
    assert flat.fit.slope <= -3.5
    assert errs[-1] * ns[-1] ** 2 <= 1e-3 * coefs[1.5]


def test_fanning_linear_coefficient(criterion):
    criterion("7: fanning scheme linear with coefficient 1/6")
    M = Sphere()
    x = np.array([1.0, 0.0, 0.0])
    w = np.array([0.0, 1.0, 0.0])
    v = np.array([0.0, 0.0, 1.0])
    ref = M.transport(x, w, v)
    for n in (100, 200, 400):
        res = transport(M, x, w, v, scheme="fanning", n=n)
        scaled = n * M.norm(res.endpoint, res.transported.vec - ref)
        print(f"n={n}: n*error={scaled:.5f}")
        assert scaled == pytest.approx(1.0 / 6.0, rel=0.1)


def test_averaged_schild_single_step_order(criterion):
    criterion("8: averaged Schild single-step order")
    M = Sphere()
    rng = np.random.default_rng(8)
    x = M.random_point(rng)
    v0 = M.random_tangent(rng, x, 1.0)
    w0 = M.random_tangent(rng, x, 1.0)
    ts = np.array([0.4, 0.2, 0.1, 0.05])
    plain, averaged = [], []
    for t in ts:
        ref = M.transport(x, t * w0, t * v0)
        x_w = M.exp(x, t * w0)
        plain.append(M.norm(x_w, schild_step(M, x, t * w0, t * v0) - ref))
        averaged.append(M.norm(x_w, averaged_schild_step(M, x, t * w0, t * v0) - ref))
    p_plain = fit_slope(ts, plain).slope
    p_avg = fit_slope(ts, averaged).slope
    print(f"plain order {p_plain:.3f}, averaged order {p_avg:.3f}")
    assert p_avg >= 4.5
    assert abs(p_plain - 3.0) <= 0.3


def test_rk4_order(criterion):
    criterion("9: RK4 geodesic endpoint order")
    M = SE3(1.0)
    x = np.eye(4)
    w = np.array([0.4, -0.7, 0.5, 0.6, 0.2, -0.3])
    exact = M.exp(x, w)
    steps = np.array([10, 20, 40, 80])
    errs = [M.dist(integrate_geodesic(M, x, w, 1.0, int(s))[0], exact) for s in steps]
    p = -fit_slope(steps, errs).slope
    print(f"errors {np.array(errs)}, order {p:.3f}")
    assert p >= 3.5


def test_cost_accounting(criterion):
    criterion("10: rk call counts affine in n")
    M = SE3(2.0)
    x = np.eye(4)
    ns = np.array([5, 10, 20, 40])
    slopes = {}
    for scheme in ("pole", "schild", "fanning"):
        calls = np.array([transport(M, x, E[2], E[3], scheme=scheme, n=int(n), backend="infinitesimal").rk_calls
                          for n in ns])
        fit = fit_linear(ns, calls)
        slopes[scheme] = fit.slope
        print(f"{scheme}: calls {calls}, slope {fit.slope:.2f}, r2 {fit.r_squared:.5f}")
        assert fit.r_squared >= 0.99
        if scheme == "fanning":
            # exactly linear: integer difference quotient, no fit round-off
            assert np.array_equal(calls, calls[0] // ns[0] * ns)
            slopes[scheme] = int(calls[0] // ns[0])
    assert 11 <= slopes["pole"] <= 60
    assert 21 <= slopes["schild"] <= 120
    assert slopes["fanning"] <= 3
