import numpy as np
import pytest

from starris.manifold import (
    RetractionError,
    armijo_step,
    conjugate_direction,
    pr_beta,
    project_to_tangent,
    retract,
    riemannian_gradient,
    solve_rcg,
    tangency_error,
    transport,
    unit_modulus_error,
)


def random_point(n, rng):
    return np.exp(1j * rng.uniform(-np.pi, np.pi, n))


def test_projection_examples(rng):
    p = random_point(6, rng)
    np.testing.assert_allclose(project_to_tangent(p, p), 0.0, atol=1e-15)
    np.testing.assert_allclose(project_to_tangent(p, 1j * p), 1j * p)
    np.testing.assert_allclose(project_to_tangent(p, (1 + 1j) * p), 1j * p, atol=1e-15)


def test_projection_idempotent(rng):
    for _ in range(100):
        p = random_point(16, rng)
        v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        t = project_to_tangent(p, v)
        np.testing.assert_allclose(project_to_tangent(p, t), t, atol=1e-12)
        assert tangency_error(p, t) < 1e-12


def test_riemannian_gradient_cases(rng):
    p = random_point(8, rng)
    np.testing.assert_allclose(riemannian_gradient(p, np.zeros(8, complex)), 0.0)
    np.testing.assert_allclose(riemannian_gradient(p, 3.0 * p), 0.0, atol=1e-14)
    g = riemannian_gradient(p, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    assert tangency_error(p, g) < 1e-12


def test_transport(rng):
    p = random_point(8, rng)
    q = random_point(8, rng)
    t = project_to_tangent(p, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    np.testing.assert_allclose(transport(p, p, t), t, atol=1e-14)
    np.testing.assert_allclose(transport(p, q, np.zeros(8, complex)), 0.0)
    moved = transport(p, q, t)
    assert tangency_error(q, moved) < 1e-12


def test_pr_beta_cases(rng):
    p = random_point(8, rng)
    g_old = project_to_tangent(p, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    assert pr_beta(g_old, g_old, g_old) == 0.0
    zero = np.zeros(8, complex)
    norm_match = g_old * np.exp(1j * 0)  # same norm as g_old
    assert pr_beta(norm_match, g_old, zero) == pytest.approx(1.0)
    # raw negative value clamps to zero
    assert pr_beta(g_old, g_old, 2.0 * g_old) == 0.0
    with pytest.raises(ZeroDivisionError):
        pr_beta(g_old, zero, zero)


def test_conjugate_direction(rng):
    p = random_point(8, rng)
    g = project_to_tangent(p, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    d_old = project_to_tangent(p, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    np.testing.assert_allclose(conjugate_direction(g, 0.5), -g)
    np.testing.assert_allclose(conjugate_direction(np.zeros(8, complex), 0.7, d_old), 0.7 * d_old)
    d = conjugate_direction(g, 0.3, d_old)
    np.testing.assert_allclose(d, -g + 0.3 * d_old)


def test_retract_examples(rng):
    p = random_point(8, rng)
    d = project_to_tangent(p, rng.standard_normal(8) + 1j * rng.standard_normal(8))
    np.testing.assert_allclose(retract(p, d, 0.0), p)
    np.testing.assert_allclose(retract(p, np.zeros(8, complex), 0.5), p)
    one = retract(np.array([1.0 + 0j]), np.array([1j]), 1.0)
    assert one[0] == pytest.approx((1 + 1j) / np.sqrt(2))
    assert unit_modulus_error(retract(p, d, 0.7)) < 1e-12


def test_retract_antipodal_error():
    p = np.array([1.0 + 0j])
    with pytest.raises(RetractionError):
        retract(p, np.array([-1.0 + 0j]), 1.0)


def test_armijo_accepts_full_step():
    # linear decrease along the direction accepts the first trial
    target = np.exp(1j * 0.3)
    cost = lambda p: float(np.abs(p - target).sum())
    p = np.array([1.0 + 0j])
    grad = 2.0 * (p - target)
    d = -project_to_tangent(p, grad)
    step = armijo_step(cost, p, d, project_to_tangent(p, grad))
    assert step == 1.0


def test_armijo_quadratic_inequality(rng):
    p = random_point(16, rng)
    target = random_point(16, rng)
    cost = lambda q: float(np.linalg.norm(q - target) ** 2)
    rg = project_to_tangent(p, 2.0 * (p - target))
    d = -rg
    step = armijo_step(cost, p, d, rg)
    assert step is not None
    f0 = cost(p)
    slope = float(np.real(np.vdot(rg, d)))
    assert cost(retract(p, d, step)) <= f0 + 1e-4 * step * slope


def test_armijo_rejects_ascent(rng):
    p = random_point(8, rng)
    target = random_point(8, rng)
    cost = lambda q: float(np.linalg.norm(q - target) ** 2)
    rg = project_to_tangent(p, 2.0 * (p - target))
    assert armijo_step(cost, p, +rg, rg) is None


def test_solver_benchmark_quadratic(rng):
    n = 64
    target = random_point(n, rng)
    cost = lambda p: float(np.linalg.norm(p - target) ** 2)
    grad = lambda p: 2.0 * (p - target)
    p_end, trace = solve_rcg(cost, grad, np.ones(n, complex), tol=1e-8, max_iter=100)
    assert trace.objective[-1] < 1e-6
    assert np.all(np.diff(trace.objective) <= 0)
    assert unit_modulus_error(p_end) < 1e-12


def test_solver_stops_at_stationary_start():
    n = 8
    cost = lambda p: 0.0
    grad = lambda p: np.zeros(n, complex)
    p_end, trace = solve_rcg(cost, grad, np.ones(n, complex), tol=1e-6, max_iter=50)
    assert trace.iterations == 0
    assert trace.converged
    np.testing.assert_array_equal(p_end, np.ones(n, complex))


def test_solver_invariants_each_iteration(rng):
    n = 32
    target = random_point(n, rng)
    cost = lambda p: float(np.linalg.norm(p - target) ** 2)
    grad = lambda p: 2.0 * (p - target)
    seen = []

    def check(p, rg, d):
        seen.append(1)
        assert unit_modulus_error(p) < 1e-12
        assert tangency_error(p, rg) < 1e-10
        assert tangency_error(p, d) < 1e-10

    solve_rcg(cost, grad, np.ones(n, complex), tol=1e-8, max_iter=100, callback=check)
    assert seen


def test_solver_deterministic(rng):
    n = 16
    target = random_point(n, rng)
    cost = lambda p: float(np.linalg.norm(p - target) ** 2)
    grad = lambda p: 2.0 * (p - target)
    p1, t1 = solve_rcg(cost, grad, np.ones(n, complex), tol=1e-8, max_iter=60)
    p2, t2 = solve_rcg(cost, grad, np.ones(n, complex), tol=1e-8, max_iter=60)
    np.testing.assert_array_equal(p1, p2)
    assert t1.objective == t2.objective
    assert t1.step == t2.step


def test_solver_rejects_bad_inputs():
    cost = lambda p: 0.0
    grad = lambda p: np.zeros(4, complex)
    with pytest.raises(ValueError):
        solve_rcg(cost, grad, np.ones(4, complex), tol=0.0, max_iter=10)
    with pytest.raises(ValueError):
        solve_rcg(cost, grad, 2.0 * np.ones(4, complex), tol=1e-6, max_iter=10)
