"""Window least squares, the damping root-solve, and condition numbers."""

import numpy as np
import pytest

from proxaccel import WindowSVD, condition_number, damping_solve, reg_ls_solve


def _window(rng, p=6, m=3):
    return rng.standard_normal((p, m)), rng.standard_normal(p)


class TestRegLsSolve:
    def test_orthonormal_columns_reduce_to_projection(self, rng):
        F, _ = np.linalg.qr(rng.standard_normal((8, 3)))
        f = rng.standard_normal(8)
        np.testing.assert_allclose(reg_ls_solve(F, f, 0.0), F.T @ f, atol=1e-12)

    def test_scalar_closed_form(self):
        F = np.array([[1.0], [0.0]])
        f = np.array([2.0, 0.0])
        np.testing.assert_allclose(reg_ls_solve(F, f, 1.0), [1.0])

    def test_heavy_damping_shrinks_to_zero(self, rng):
        F, f = _window(rng)
        gamma = reg_ls_solve(F, f, 1e12)
        assert np.linalg.norm(gamma) <= 1e-9 * np.linalg.norm(F.T @ f)

    def test_rank_deficient_without_damping_raises(self, rng):
        col = rng.standard_normal(5)
        F = np.column_stack([col, col])
        with pytest.raises(np.linalg.LinAlgError):
            reg_ls_solve(F, rng.standard_normal(5), 0.0)

    def test_satisfies_the_normal_equations(self, rng):
        for _ in range(20):
            F, f = _window(rng, p=7, m=4)
            rhs = F.T @ f
            for lam in (0.0, 1e-8, 1e-3, 1.0, 1e4):
                gamma = reg_ls_solve(F, f, lam)
                gap = (F.T @ F + lam * np.eye(4)) @ gamma - rhs
                assert np.linalg.norm(gap) <= 1e-9 * (np.linalg.norm(rhs) + 1.0)

    def test_norm_monotone_in_damping(self, rng):
        F, f = _window(rng, p=9, m=4)
        lams = np.logspace(-8, 8, 20)
        norms = [np.linalg.norm(reg_ls_solve(F, f, lam)) for lam in lams]
        assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


class TestDampingSolve:
    def test_no_damping_requested(self, rng):
        F, f = _window(rng)
        lam, gamma = damping_solve(F, f, 1.0)
        assert lam == 0.0
        np.testing.assert_allclose(gamma, reg_ls_solve(F, f, 0.0), atol=1e-12)

    def test_scalar_algebra(self):
        # beta(lam) = 2/(1+lam); delta = 1/4 of ||beta_LS||^2 = 4 needs lam = 1
        F = np.array([[1.0], [0.0]])
        f = np.array([2.0, 0.0])
        lam, gamma = damping_solve(F, f, 0.25)
        assert lam == pytest.approx(1.0, rel=1e-8)
        np.testing.assert_allclose(gamma, [1.0], rtol=1e-8)

    def test_defining_equation_on_random_windows(self, rng):
        for _ in range(10):
            F, f = _window(rng, p=6, m=3)
            target_ls = np.linalg.norm(reg_ls_solve(F, f, 0.0)) ** 2
            for delta in (0.01, 0.1, 0.5, 0.9, 1.0):
                lam, gamma = damping_solve(F, f, delta)
                # re-evaluate through the independent solve at the returned lam
                check = np.linalg.norm(reg_ls_solve(F, f, lam)) ** 2
                assert abs(check - delta * target_ls) <= 1e-8 * delta * target_ls
                assert abs(np.linalg.norm(gamma) ** 2 - delta * target_ls) <= 1e-8 * delta * target_ls

    def test_zero_residual_direction_returns_zero(self):
        F = np.array([[1.0], [0.0]])
        f = np.array([0.0, 3.0])  # orthogonal to the column span
        lam, gamma = damping_solve(F, f, 0.5)
        assert lam == 0.0
        np.testing.assert_array_equal(gamma, [0.0])

    def test_rejects_bad_delta(self, rng):
        F, f = _window(rng)
        for delta in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                damping_solve(F, f, delta)


class TestConditionNumber:
    def test_orthonormal(self, rng):
        F, _ = np.linalg.qr(rng.standard_normal((7, 3)))
        assert condition_number(F) == pytest.approx(1.0, rel=1e-12)

    def test_known_singular_values(self):
        F = np.zeros((4, 2))
        F[0, 0] = 2.0
        F[1, 1] = 1.0
        assert condition_number(F) == pytest.approx(2.0, rel=1e-12)

    def test_duplicated_column_is_infinite(self, rng):
        col = rng.standard_normal(5)
        assert condition_number(np.column_stack([col, col])) == float("inf")

    def test_single_column_is_one(self, rng):
        assert condition_number(rng.standard_normal((6, 1))) == 1.0


class TestWindowSVD:
    def test_shares_one_decomposition(self, rng):
        F, f = _window(rng, p=8, m=3)
        svd = WindowSVD(F, f)
        assert svd.condition_number == pytest.approx(condition_number(F), rel=1e-12)
        np.testing.assert_allclose(svd.gamma(0.5), reg_ls_solve(F, f, 0.5), atol=1e-12)
        lam, gamma = svd.damped_gamma(0.3)
        lam2, gamma2 = damping_solve(F, f, 0.3)
        assert lam == pytest.approx(lam2, rel=1e-10)
        np.testing.assert_allclose(gamma, gamma2, atol=1e-12)

    def test_dropping_zero_rows_leaves_the_solution_unchanged(self, rng):
        # the exact-subsetting identity behind the row-dropping option
        for _ in range(20):
            F, f = _window(rng, p=10, m=3)
            zero = rng.choice(10, size=4, replace=False)
            F[zero] = 0.0
            keep = np.setdiff1d(np.arange(10), zero)
            full = reg_ls_solve(F, f, 1e-6)
            sub = reg_ls_solve(F[keep], f[keep], 1e-6)
            np.testing.assert_allclose(full, sub, atol=1e-12)
            lam_f, g_f = damping_solve(F, f, 0.4)
            lam_s, g_s = damping_solve(F[keep], f[keep], 0.4)
            np.testing.assert_allclose(g_f, g_s, atol=1e-10)
