import itertools

import numpy as np
import pytest

from subnewton import kernels
from subnewton.kernels import (
    KIND_BOX,
    KIND_L1,
    backends,
    project_box,
    project_l1,
    solve_projected_quadratic,
)

TOL = 1e-10
CAP = 100_000


def l1_projection_bisect(v, radius):
    """Independent reference: bisect the shrinkage threshold."""
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    lo, hi = 0.0, float(a.max())
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.maximum(a - mid, 0.0).sum() > radius:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def model_value(z, xk, g, h):
    d = z - xk
    return float(g @ d + 0.5 * d @ h @ d)


def random_spd(rng, p, lo=0.5, hi=3.0):
    q = np.linalg.qr(rng.standard_normal((p, p)))[0]
    return q @ np.diag(rng.uniform(lo, hi, size=p)) @ q.T


def box_qp_active_set(xk, g, h, lower, upper):
    """Independent reference: enumerate all active-set patterns, pick the KKT point."""
    p = xk.size
    best = None
    for pattern in itertools.product((-1, 0, 1), repeat=p):
        z = np.empty(p)
        free = [i for i, s in enumerate(pattern) if s == 0]
        for i, s in enumerate(pattern):
            if s == -1:
                z[i] = lower[i]
            elif s == 1:
                z[i] = upper[i]
        if free:
            fixed = [i for i in range(p) if pattern[i] != 0]
            rhs = -g[free] - h[np.ix_(free, fixed)] @ (z[fixed] - xk[fixed])
            z[free] = xk[free] + np.linalg.solve(h[np.ix_(free, free)], rhs)
        grad = g + h @ (z - xk)
        ok = True
        for i, s in enumerate(pattern):
            if s == 0:
                ok &= lower[i] - 1e-9 <= z[i] <= upper[i] + 1e-9
            elif s == -1:
                ok &= grad[i] >= -1e-9
            else:
                ok &= grad[i] <= 1e-9
        if ok and (best is None or model_value(z, xk, g, h) < model_value(best, xk, g, h)):
            best = z
    assert best is not None
    return best


# -- projections ---------------------------------------------------------------------


def test_l1_projection_matches_bisection():
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = int(rng.integers(1, 12))
        v = 3.0 * rng.standard_normal(p)
        radius = float(rng.uniform(0.1, 3.0))
        assert np.allclose(project_l1(v, radius), l1_projection_bisect(v, radius), atol=1e-12)


def test_l1_projection_interior_is_identity():
    v = np.array([0.25, -0.25, 0.1])
    assert np.array_equal(project_l1(v, 1.0), v)


def test_l1_projection_feasible_and_idempotent():
    rng = np.random.default_rng(1)
    for _ in range(50):
        v = 5.0 * rng.standard_normal(6)
        z = project_l1(v, 1.0)
        assert np.abs(z).sum() <= 1.0 + 1e-12
        assert np.allclose(project_l1(z, 1.0), z, atol=1e-12)


def test_l1_projection_nonexpansive():
    rng = np.random.default_rng(2)
    for _ in range(100):
        u = 4.0 * rng.standard_normal(5)
        v = 4.0 * rng.standard_normal(5)
        du = project_l1(u, 1.0) - project_l1(v, 1.0)
        assert np.linalg.norm(du) <= np.linalg.norm(u - v) + 1e-12


def test_l1_projection_validation():
    with pytest.raises(ValueError):
        project_l1(np.ones(3), 0.0)


def test_box_projection_is_clip():
    rng = np.random.default_rng(3)
    v = 2.0 * rng.standard_normal(7)
    lower = np.full(7, -0.5)
    upper = np.full(7, 0.75)
    assert np.array_equal(project_box(v, lower, upper), np.clip(v, lower, upper))
    # infinite bounds leave the point alone
    assert np.array_equal(project_box(v, -np.inf, np.inf), v)


# -- projected quadratic solve ---------------------------------------------------------


def test_identity_hessian_reduces_to_projection():
    # with H = I the model minimizer over the ball is the projection of xk - g
    rng = np.random.default_rng(4)
    xk = rng.standard_normal(5)
    g = rng.standard_normal(5)
    z, iters, resid = solve_projected_quadratic(
        xk, g, np.eye(5), 1.0, KIND_L1, 1.0, None, None, TOL, CAP
    )
    assert resid <= TOL
    assert iters >= 1
    assert np.allclose(z, project_l1(xk - g, 1.0), atol=1e-9)


def test_huge_radius_recovers_newton_step():
    rng = np.random.default_rng(5)
    h = random_spd(rng, 4)
    g = rng.standard_normal(4)
    xk = rng.standard_normal(4)
    z, _, resid = solve_projected_quadratic(
        xk, g, h, float(np.linalg.eigvalsh(h)[-1]), KIND_L1, 1e6, None, None, TOL, CAP
    )
    assert resid <= TOL
    assert np.allclose(z, xk - np.linalg.solve(h, g), atol=1e-6)


def test_l1_solution_beats_sampled_feasible_points():
    rng = np.random.default_rng(6)
    h = random_spd(rng, 4)
    g = rng.standard_normal(4)
    xk = 0.3 * rng.standard_normal(4)
    z, _, resid = solve_projected_quadratic(
        xk, g, h, float(np.linalg.eigvalsh(h)[-1]), KIND_L1, 1.0, None, None, TOL, CAP
    )
    assert resid <= TOL
    assert np.abs(z).sum() <= 1.0 + 1e-12
    best = model_value(z, xk, g, h)
    for _ in range(300):
        candidate = rng.standard_normal(4)
        candidate = candidate / np.abs(candidate).sum() * rng.random()
        assert best <= model_value(candidate, xk, g, h) + 1e-9


def test_box_solution_matches_active_set_enumeration():
    rng = np.random.default_rng(7)
    for trial in range(20):
        h = random_spd(rng, 3)
        g = 2.0 * rng.standard_normal(3)
        xk = rng.standard_normal(3)
        lower = np.full(3, -0.4)
        upper = np.full(3, 0.6)
        z, _, resid = solve_projected_quadratic(
            xk, g, h, float(np.linalg.eigvalsh(h)[-1]), KIND_BOX, 0.0, lower, upper, TOL, CAP
        )
        assert resid <= TOL
        expected = box_qp_active_set(xk, g, h, lower, upper)
        assert np.allclose(z, expected, atol=1e-8)


def test_box_solution_kkt_signs():
    rng = np.random.default_rng(8)
    h = random_spd(rng, 5)
    g = 3.0 * rng.standard_normal(5)
    xk = np.zeros(5)
    lower = np.full(5, -0.25)
    upper = np.full(5, 0.25)
    z, _, _ = solve_projected_quadratic(
        xk, g, h, float(np.linalg.eigvalsh(h)[-1]), KIND_BOX, 0.0, lower, upper, TOL, CAP
    )
    grad = g + h @ (z - xk)
    for i in range(5):
        if abs(z[i] - lower[i]) <= 1e-9:
            assert grad[i] >= -1e-8
        elif abs(z[i] - upper[i]) <= 1e-9:
            assert grad[i] <= 1e-8
        else:
            assert abs(grad[i]) <= 1e-8


def test_iteration_cap_reported():
    rng = np.random.default_rng(9)
    h = random_spd(rng, 6, lo=0.01, hi=50.0)  # badly conditioned on purpose
    g = rng.standard_normal(6)
    z, iters, resid = solve_projected_quadratic(
        np.zeros(6), g, h, float(np.linalg.eigvalsh(h)[-1]), KIND_L1, 0.5, None, None, 0.0, 40
    )
    assert iters == 40
    assert resid > 0.0
    assert np.abs(z).sum() <= 0.5 + 1e-12


def test_solver_kernel_validation():
    with pytest.raises(ValueError):
        solve_projected_quadratic(
            np.zeros(2), np.ones(2), np.eye(2), 0.0, KIND_L1, 1.0, None, None, TOL, CAP
        )
    with pytest.raises(ValueError):
        solve_projected_quadratic(
            np.zeros(2), np.ones(2), np.eye(2), 1.0, 99, 1.0, None, None, TOL, CAP
        )


# -- backend agreement -----------------------------------------------------------------


def test_backend_constant_is_consistent():
    assert kernels.BACKEND in ("compiled", "python")
    assert kernels.BACKEND in backends()


def test_backends_agree_on_projections():
    impls = backends()
    if "compiled" not in impls:
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(10)
    for _ in range(50):
        v = 3.0 * rng.standard_normal(8)
        a = impls["python"].project_l1(v, 1.3)
        b = impls["compiled"].project_l1(v, 1.3)
        assert np.allclose(a, b, atol=1e-12)
        lo, hi = np.full(8, -0.3), np.full(8, 0.4)
        assert np.allclose(
            impls["python"].project_box(v, lo, hi),
            impls["compiled"].project_box(v, lo, hi),
            atol=1e-14,
        )


def test_backends_agree_on_quadratic_solve():
    impls = backends()
    if "compiled" not in impls:
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(11)
    for kind in (KIND_L1, KIND_BOX):
        h = random_spd(rng, 5)
        g = rng.standard_normal(5)
        xk = 0.2 * rng.standard_normal(5)
        lip = float(np.linalg.eigvalsh(h)[-1])
        lo, hi = np.full(5, -0.5), np.full(5, 0.5)
        za, _, ra = impls["python"].solve_projected_quadratic(
            xk, g, h, lip, kind, 1.0, lo, hi, TOL, CAP
        )
        zb, _, rb = impls["compiled"].solve_projected_quadratic(
            xk, g, h, lip, kind, 1.0, lo, hi, TOL, CAP
        )
        assert ra <= TOL and rb <= TOL
        assert np.allclose(za, zb, atol=1e-9)
