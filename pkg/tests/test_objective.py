import math

import numpy as np
import pytest
from conftest import (
    assert_beats_competitors,
    brute_min_1d,
    fd_gradient,
    fd_hessian,
    prox_objective,
)

from isad.errors import ConfigurationError, ProxDegeneracyWarning
from isad.objective import (
    bounded_hessian_generator,
    bregman,
    half_sqnorm_generator,
    log_sqnorm_smooth,
    logistic_loss,
    prox_coordinate_drop,
    prox_irl,
    prox_neg_log_sqnorm,
    prox_squared_offset,
    prox_zero,
    quadratic_smooth,
    tikhonov_smooth,
    zero_smooth,
)


class TestBregman:
    def test_same_point_is_exactly_zero(self):
        phi = half_sqnorm_generator(3)
        x = np.array([1.0, -2.0, 0.5])
        assert bregman(phi, x, x) == 0.0

    def test_half_sqnorm_hand_value(self):
        phi = half_sqnorm_generator(2)
        assert bregman(phi, np.array([1.0, 0.0]), np.zeros(2)) == pytest.approx(0.5)

    def test_nonnegative_for_convex_generator(self):
        rng = np.random.default_rng(0)
        smooth = quadratic_smooth(np.array([[1.0, 0.2], [0.2, 0.5]]))
        phi = bounded_hessian_generator(smooth)
        for _ in range(30):
            x1, x2 = rng.standard_normal(2), rng.standard_normal(2)
            assert bregman(phi, x1, x2) >= -1e-12

    def test_dim_mismatch(self):
        phi = half_sqnorm_generator(2)
        with pytest.raises(ConfigurationError):
            bregman(phi, np.zeros(3), np.zeros(3))


class TestBoundedHessianGenerator:
    def test_zero_smooth_gives_half_sqnorm(self):
        phi = bounded_hessian_generator(zero_smooth(2, hessian_bound=1.0))
        x = np.array([3.0, -4.0])
        assert phi.value(x) == pytest.approx(12.5)
        np.testing.assert_allclose(phi.grad(x), x)

    def test_exact_cancellation(self):
        # h = ||x||^2 / 2 realized as x^T (I/2) x, so gamma = 1
        smooth = quadratic_smooth(0.5 * np.eye(2))
        assert smooth.hessian_bound == pytest.approx(1.0)
        phi = bounded_hessian_generator(smooth)
        rng = np.random.default_rng(1)
        for _ in range(10):
            x1, x2 = rng.standard_normal(2), rng.standard_normal(2)
            assert phi.value(x1) == pytest.approx(0.0, abs=1e-12)
            assert bregman(phi, x1, x2) == pytest.approx(0.0, abs=1e-12)

    def test_sum_identity(self):
        rng = np.random.default_rng(2)
        X = rng.standard_normal((6, 3))
        y = rng.integers(0, 2, 6).astype(float)
        smooth = logistic_loss(X, y)
        phi = bounded_hessian_generator(smooth)
        gamma = smooth.hessian_bound
        for _ in range(20):
            x = rng.standard_normal(3)
            lhs = smooth.value(x) + phi.value(x)
            assert lhs == pytest.approx(0.5 * gamma * float(x @ x), rel=1e-12)

    def test_logistic_generator_fd_hessian_psd(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((8, 3))
        y = rng.integers(0, 2, 8).astype(float)
        phi = bounded_hessian_generator(logistic_loss(X, y))
        for _ in range(50):
            x = rng.standard_normal(3)
            H = fd_hessian(phi.value, x)
            assert np.linalg.eigvalsh(H)[0] >= -1e-6

    def test_missing_bound_raises(self):
        with pytest.raises(ConfigurationError):
            bounded_hessian_generator(log_sqnorm_smooth(2))


class TestLogisticLoss:
    def test_gradient_at_decision_boundary(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((5, 3))
        y = rng.integers(0, 2, 5).astype(float)
        smooth = logistic_loss(X, y)
        # theta orthogonal to all rows: use zero vector, every margin is 0
        grad = smooth.grad(np.zeros(3))
        oracle = X.T @ (0.5 - y)
        np.testing.assert_allclose(grad, oracle, atol=1e-12)

    def test_single_datum_bound(self):
        smooth = logistic_loss(np.array([[1.0, 0.0]]), np.array([1.0]))
        assert smooth.hessian_bound == pytest.approx(0.25)

    def test_fd_hessian_dominated_by_bound(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((7, 3))
        y = rng.integers(0, 2, 7).astype(float)
        smooth = logistic_loss(X, y)
        for _ in range(50):
            theta = rng.standard_normal(3) * 2.0
            H = fd_hessian(smooth.value, theta)
            eigs = np.linalg.eigvalsh(H)
            assert eigs[0] >= -1e-6
            assert eigs[-1] <= smooth.hessian_bound + 1e-6

    def test_bad_labels(self):
        with pytest.raises(ValueError):
            logistic_loss(np.eye(2), np.array([0.0, 2.0]))


class TestSmoothGradients:
    @pytest.mark.parametrize("case", ["quadratic", "tikhonov", "logistic", "logsq"])
    def test_gradient_matches_finite_differences(self, case):
        rng = np.random.default_rng(hash(case) % (2**32))
        if case == "quadratic":
            smooth = quadratic_smooth(rng.standard_normal((4, 4)), rng.standard_normal(4), 0.3)
        elif case == "tikhonov":
            smooth = tikhonov_smooth(rng.standard_normal((4, 4)))
        elif case == "logistic":
            smooth = logistic_loss(rng.standard_normal((6, 4)), rng.integers(0, 2, 6).astype(float))
        else:
            smooth = log_sqnorm_smooth(4)
        for _ in range(50):
            x = rng.standard_normal(4)
            if case == "logsq":
                x = x / np.linalg.norm(x) * rng.uniform(0.5, 3.0)
            grad = smooth.grad(x)
            approx = fd_gradient(smooth.value, x)
            np.testing.assert_allclose(grad, approx, rtol=1e-5, atol=1e-7)

    def test_log_sqnorm_origin(self):
        smooth = log_sqnorm_smooth(2)
        assert smooth.value(np.zeros(2)) == -math.inf
        with pytest.raises(ConfigurationError):
            smooth.grad(np.zeros(2))


class TestProxZero:
    def test_identity(self):
        p = prox_zero(2)
        np.testing.assert_array_equal(p.prox(1.0, np.array([1.0, 2.0])), [1.0, 2.0])
        np.testing.assert_array_equal(p.prox(17.0, np.array([1.0, 2.0])), [1.0, 2.0])

    def test_competitors(self):
        rng = np.random.default_rng(6)
        assert_beats_competitors(prox_zero(3), 0.7, rng.standard_normal(3), rng)


class TestProxSquaredOffset:
    def test_hand_value(self):
        p = prox_squared_offset(np.zeros(2))
        np.testing.assert_allclose(p.prox(0.5, np.array([2.0, 0.0])), [1.0, 0.0])

    def test_fixed_point_at_offset(self):
        g = np.array([1.5, -2.0])
        p = prox_squared_offset(g)
        for tau in (0.1, 1.0, 10.0):
            np.testing.assert_allclose(p.prox(tau, g), g)

    def test_brute_force_coordinates(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            g = rng.standard_normal(3)
            u = rng.standard_normal(3)
            tau = rng.uniform(0.05, 3.0)
            p = prox_squared_offset(g)
            y = p.prox(tau, u)
            for i in range(3):
                lo = min(u[i], g[i]) - 2.0
                hi = max(u[i], g[i]) + 2.0
                oracle = brute_min_1d(
                    lambda v: tau * (v - g[i]) ** 2 + 0.5 * (v - u[i]) ** 2, lo, hi
                )
                assert y[i] == pytest.approx(oracle, abs=1e-6)

    def test_competitors(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            g = rng.standard_normal(4)
            p = prox_squared_offset(g)
            assert_beats_competitors(p, rng.uniform(0.1, 2.0), rng.standard_normal(4), rng)


class TestProxNegLogSqnorm:
    def test_hand_value(self):
        p = prox_neg_log_sqnorm(2)
        y = p.prox(1.0, np.array([1.0, 0.0]))
        np.testing.assert_allclose(y, [2.0, 0.0], atol=1e-12)
        oracle = brute_min_1d(
            lambda s: -2.0 * math.log(abs(s) + 1e-300) + 0.5 * (s - 1.0) ** 2, 0.01, 12.0
        )
        assert y[0] == pytest.approx(oracle, abs=1e-7)

    def test_small_tau_limit(self):
        p = prox_neg_log_sqnorm(2)
        u = np.array([3.0, 4.0])
        np.testing.assert_allclose(p.prox(1e-12, u), u, rtol=1e-6)

    def test_radial_grid_oracle(self):
        rng = np.random.default_rng(9)
        p = prox_neg_log_sqnorm(3)
        for _ in range(10):
            u = rng.standard_normal(3) * rng.uniform(0.2, 3.0)
            tau = rng.uniform(0.05, 2.0)
            y = p.prox(tau, u)
            r = np.linalg.norm(u)
            s_star = brute_min_1d(
                lambda s: -2.0 * tau * math.log(abs(s) + 1e-300)
                + 0.5 * (s - r) ** 2,
                1e-4,
                r + 10.0 * tau,
            )
            np.testing.assert_allclose(y, s_star * u / r, atol=1e-6)

    def test_origin_degeneracy(self):
        p = prox_neg_log_sqnorm(2)
        with pytest.warns(ProxDegeneracyWarning):
            y = p.prox(1.0, np.zeros(2))
        assert y[1] == 0.0 and y[0] > 0.0

    def test_competitors(self):
        rng = np.random.default_rng(10)
        p = prox_neg_log_sqnorm(2)
        for _ in range(10):
            u = rng.standard_normal(2) * rng.uniform(0.3, 2.0)
            assert_beats_competitors(p, rng.uniform(0.1, 2.0), u, rng)


class TestProxIrl:
    def test_hand_value(self):
        p = prox_irl(1)
        np.testing.assert_allclose(p.prox(1.0, np.array([3.0, 0.0])), [2.0, -1.0])

    def test_zero_block_stays_zero(self):
        p = prox_irl(2)
        y = p.prox(0.7, np.array([0.0, 0.0, 5.0, -3.0]))
        np.testing.assert_array_equal(y[:2], [0.0, 0.0])
        np.testing.assert_array_equal(y[2:], [-1.0, -1.0])

    def test_coordinate_brute_force(self):
        rng = np.random.default_rng(11)
        N = 3
        p = prox_irl(N)
        for _ in range(10):
            u = rng.standard_normal(2 * N) * 2.0
            tau = rng.uniform(0.1, 3.0)
            y = p.prox(tau, u)
            for i in range(N):
                oracle = brute_min_1d(
                    lambda v: (tau / N) * abs(v) + 0.5 * (v - u[i]) ** 2,
                    -abs(u[i]) - 1.0,
                    abs(u[i]) + 1.0,
                )
                assert y[i] == pytest.approx(oracle, abs=1e-6)
            np.testing.assert_array_equal(y[N:], -np.ones(N))

    def test_value_infeasible_is_infinite(self):
        p = prox_irl(1)
        assert p.value(np.array([1.0, 0.0])) == math.inf
        assert p.value(np.array([2.0, -1.0])) == pytest.approx(2.0)

    def test_competitors_including_feasible(self):
        rng = np.random.default_rng(12)
        N = 2
        p = prox_irl(N)
        for _ in range(5):
            u = rng.standard_normal(2 * N)
            tau = rng.uniform(0.2, 2.0)
            y = p.prox(tau, u)
            base = prox_objective(p, tau, u, y)
            for _ in range(100):
                comp = y.copy()
                comp[:N] += 0.5 * rng.standard_normal(N)
                assert base <= prox_objective(p, tau, u, comp) + 1e-9


class TestProxCoordinateDrop:
    def test_full_width_matches_inner(self):
        g = np.array([0.3, -0.7])
        inner = prox_squared_offset(g)
        p = prox_coordinate_drop(2, inner)
        u = np.array([1.0, 2.0])
        np.testing.assert_array_equal(p.prox(0.5, u), inner.prox(0.5, u))

    def test_zero_inner_gives_identity(self):
        p = prox_coordinate_drop(4, prox_zero(2))
        u = np.arange(4.0)
        np.testing.assert_array_equal(p.prox(2.0, u), u)

    def test_joint_grid_separability(self):
        inner = prox_squared_offset(np.array([1.0]))
        p = prox_coordinate_drop(2, inner)
        u = np.array([0.2, -0.8])
        tau = 0.6
        y = p.prox(tau, u)
        grid = np.linspace(-3, 3, 241)
        best, best_val = None, math.inf
        for a in grid:
            for b in grid:
                val = prox_objective(p, tau, u, np.array([a, b]))
                if val < best_val:
                    best, best_val = (a, b), val
        np.testing.assert_allclose(y, best, atol=0.05)
        assert prox_objective(p, tau, u, y) <= best_val + 1e-9

    def test_dim_mismatch(self):
        with pytest.raises(ConfigurationError):
            prox_coordinate_drop(1, prox_squared_offset(np.zeros(2)))
