"""Backend-specific contracts: prox kernels, gradients, constructors."""

import numpy as np
import pytest

from proxaccel import (
    BoxQPProblem,
    LassoProblem,
    LogisticProblem,
    MatrixCompletionProblem,
    box_project,
    pg_step,
    soft_threshold,
    svd_soft_threshold,
)


class TestSoftThreshold:
    def test_formula(self):
        np.testing.assert_allclose(soft_threshold([3.0, -0.5, 1.0], 1.0), [2.0, 0.0, 0.0])

    def test_zero_threshold_is_identity(self, rng):
        v = rng.standard_normal(50)
        np.testing.assert_array_equal(soft_threshold(v, 0.0), v)

    def test_negative_value(self):
        np.testing.assert_allclose(soft_threshold([-2.5], 1.5), [-1.0])

    def test_rejects_negative_threshold(self):
        with pytest.raises(ValueError):
            soft_threshold([1.0], -0.1)


class TestSvdSoftThreshold:
    def test_diagonal(self):
        out = svd_soft_threshold(np.diag([3.0, 1.0]), 2.0)
        np.testing.assert_allclose(out, np.diag([1.0, 0.0]), atol=1e-12)

    def test_zero_matrix(self):
        np.testing.assert_array_equal(svd_soft_threshold(np.zeros((3, 4)), 5.0), np.zeros((3, 4)))

    def test_rank_one(self, rng):
        u = rng.standard_normal(5)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        out = svd_soft_threshold(2.0 * np.outer(u, v), 0.5)
        np.testing.assert_allclose(out, 1.5 * np.outer(u, v), atol=1e-12)

    def test_solves_the_nuclear_prox_on_diagonal_instances(self):
        # brute force over diagonal candidates: for diagonal Z the minimizer
        # of ||B - Z||_F^2/2 + s||B||_* is diagonal
        Z = np.diag([2.3, 0.4])
        s = 0.9
        out = svd_soft_threshold(Z, s)
        grid = np.arange(-3.0, 3.0, 1e-3)
        for i in range(2):
            vals = 0.5 * (grid - Z[i, i]) ** 2 + s * np.abs(grid)
            assert abs(out[i, i] - grid[np.argmin(vals)]) <= 1e-3

    def test_rejects_non_finite_and_non_matrix(self):
        with pytest.raises(ValueError):
            svd_soft_threshold(np.array([1.0, 2.0]), 0.5)
        with pytest.raises(ValueError):
            svd_soft_threshold(np.array([[np.inf, 0.0], [0.0, 1.0]]), 0.5)
        with pytest.raises(ValueError):
            svd_soft_threshold(np.eye(2), -1.0)


class TestBoxProject:
    def test_clamps(self):
        np.testing.assert_allclose(box_project([2.0, -0.3, -5.0]), [1.0, -0.3, -1.0])

    def test_interior_fixed(self, rng):
        v = rng.uniform(-0.99, 0.99, size=20)
        np.testing.assert_array_equal(box_project(v), v)

    def test_boundary_fixed(self):
        np.testing.assert_array_equal(box_project([1.0, -1.0]), [1.0, -1.0])

    def test_is_the_euclidean_projection(self, rng):
        v = rng.standard_normal(10) * 3.0
        proj = box_project(v)
        for _ in range(100):
            z = rng.uniform(-1.0, 1.0, size=10)
            assert np.linalg.norm(proj - v) <= np.linalg.norm(z - v) + 1e-12

    def test_rejects_empty_box(self):
        with pytest.raises(ValueError):
            box_project([0.0], lo=1.0, hi=-1.0)


class TestLogisticGradient:
    def test_at_zero(self, logistic_small):
        g = logistic_small.smooth_grad(np.zeros(logistic_small.dim))
        expected = logistic_small.X.T @ (0.5 - logistic_small.y)
        np.testing.assert_allclose(g, expected, rtol=1e-14)

    def test_saturates_toward_zero(self):
        # single row x = (1), y = 1: gradient theta(b) - 1 -> 0 as b grows
        prob = LogisticProblem(np.array([[1.0]]), np.array([1.0]), 0.0, lipschitz=0.25)
        g = prob.smooth_grad(np.array([600.0]))
        assert abs(g[0]) < 1e-200

    def test_large_predictors_stay_finite(self, rng):
        X = rng.standard_normal((8, 3)) * 300.0
        y = (rng.random(8) < 0.5).astype(float)
        prob = LogisticProblem(X, y, 0.1)
        beta = rng.standard_normal(3)
        assert np.isfinite(prob.smooth(beta))
        assert np.all(np.isfinite(prob.smooth_grad(beta)))

    def test_convex_midpoint_inequality(self, logistic_small, rng):
        for _ in range(100):
            a = rng.standard_normal(logistic_small.dim)
            b = rng.standard_normal(logistic_small.dim)
            mid = logistic_small.smooth(0.5 * (a + b))
            avg = 0.5 * (logistic_small.smooth(a) + logistic_small.smooth(b))
            assert mid <= avg + 1e-12


class TestCompletionGradient:
    def test_zero_where_it_matches_observations(self, completion_small):
        Z = np.zeros(completion_small.dim)
        Z[completion_small.observed_flat] = completion_small.observed_vals
        np.testing.assert_array_equal(completion_small.smooth_grad(Z), np.zeros(completion_small.dim))

    def test_empty_observed_set(self):
        prob = MatrixCompletionProblem(3, 4, [], [], [], 1.0)
        np.testing.assert_array_equal(prob.smooth_grad(np.ones(12)), np.zeros(12))
        assert prob.smooth(np.ones(12)) == 0.0

    def test_single_entry(self):
        prob = MatrixCompletionProblem(2, 2, [1], [1], [5.0], 0.0)
        Z = np.array([[0.0, 0.0], [0.0, 7.0]]).ravel()
        g = prob.smooth_grad(Z).reshape(2, 2)
        np.testing.assert_array_equal(g, [[0.0, 0.0], [0.0, 2.0]])


class TestQpGradient:
    def test_identity(self):
        prob = BoxQPProblem(np.eye(3), np.zeros(3))
        x = np.array([0.3, -0.2, 0.9])
        np.testing.assert_array_equal(prob.smooth_grad(x), x)

    def test_zero_at_unconstrained_minimizer(self, qp_small):
        xstar = np.linalg.solve(qp_small.Q, -qp_small.q)
        assert np.linalg.norm(qp_small.smooth_grad(xstar)) < 1e-8

    def test_finite_differences(self, qp_small, rng):
        x = rng.standard_normal(qp_small.dim)
        g = qp_small.smooth_grad(x)
        for i in rng.choice(qp_small.dim, size=5, replace=False):
            e = np.zeros(qp_small.dim)
            e[i] = 1e-6
            fd = (qp_small.smooth(x + e) - qp_small.smooth(x - e)) / 2e-6
            assert abs(g[i] - fd) <= 1e-6 * max(1.0, abs(fd))


class TestPgStepIdentities:
    def test_lasso_step_is_soft_thresholding_bitwise(self, lasso_small, rng):
        t = lasso_small.default_step()
        beta = rng.standard_normal(lasso_small.dim)
        direct = pg_step(lasso_small, beta, t)
        X, y = lasso_small.X, lasso_small.y
        via_kernel = soft_threshold(beta + t * (X.T @ (y - X @ beta)), t * lasso_small.penalty)
        np.testing.assert_array_equal(direct, via_kernel)

    def test_completion_step_is_impute_and_shrink(self, completion_small, rng):
        # with t = 1 the step is D_lambda(Z - P(Z) + P(A))
        Z = rng.standard_normal(completion_small.dim)
        direct = pg_step(completion_small, Z, 1.0)
        imputed = Z.copy()
        imputed[completion_small.observed_flat] = completion_small.observed_vals
        shrunk = svd_soft_threshold(
            imputed.reshape(completion_small.n_rows, completion_small.n_cols),
            completion_small.penalty,
        ).ravel()
        np.testing.assert_allclose(direct, shrunk, atol=1e-14)


class TestConstructors:
    def test_lasso_rejects_shape_mismatch_and_non_finite(self):
        with pytest.raises(ValueError):
            LassoProblem(np.eye(3), np.zeros(2), 1.0)
        with pytest.raises(ValueError):
            LassoProblem(np.array([[np.nan, 0.0]]), np.zeros(1), 1.0)
        with pytest.raises(ValueError):
            LassoProblem(np.eye(2), np.zeros(2), -1.0)

    def test_logistic_rejects_non_binary_response(self):
        with pytest.raises(ValueError):
            LogisticProblem(np.eye(2), np.array([0.0, 0.5]), 1.0)

    def test_completion_deduplicates_consistent_observations(self):
        prob = MatrixCompletionProblem(2, 2, [0, 0], [1, 1], [3.0, 3.0], 0.0)
        assert prob.observed_flat.size == 1

    def test_completion_rejects_conflicting_duplicates(self):
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            MatrixCompletionProblem(2, 2, [0, 0], [1, 1], [3.0, 4.0], 0.0)

    def test_completion_rejects_out_of_range_indices(self):
        with pytest.raises(ValueError):
            MatrixCompletionProblem(2, 2, [2], [0], [1.0], 0.0)

    def test_qp_rejects_asymmetric_matrix(self):
        Q = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            BoxQPProblem(Q, np.zeros(2))

    def test_lipschitz_certificates(self, lasso_small, logistic_small, completion_small, qp_small):
        # each cached bound sits at or above the exact top eigenvalue
        exact = np.linalg.eigvalsh(lasso_small.X.T @ lasso_small.X)[-1]
        assert exact <= lasso_small.lipschitz <= exact * (1.0 + 1e-5)
        exact = np.linalg.eigvalsh(logistic_small.X.T @ logistic_small.X)[-1] / 4.0
        assert exact <= logistic_small.lipschitz <= exact * (1.0 + 1e-5)
        assert completion_small.lipschitz == 1.0
        exact = np.linalg.eigvalsh(qp_small.Q)[-1]
        assert exact <= qp_small.lipschitz <= exact * (1.0 + 1e-5)
