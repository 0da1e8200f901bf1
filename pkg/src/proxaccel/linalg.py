"""Dense linear algebra for residual-difference windows.

An acceleration window is a tall matrix ``F`` of residual differences and a
current residual ``f``.  One iteration needs the window's condition number,
a ridge-regularized least-squares coefficient vector, and a damping level
solving a norm-matching equation.  All three are served off a single SVD,
held by :class:`WindowSVD`, so the factorization cost is paid once per
iteration.
"""

import math

import numpy as np

__all__ = ["WindowSVD", "condition_number", "reg_ls_solve", "damping_solve"]

# Singular values below RANK_TOL * largest are treated as zero when a
# pseudo-inverse or an exact (unregularized) solve is requested.
RANK_TOL = 1e-12
_PINV_TOL = 1e-14


class WindowSVD:
    """Thin SVD of a window matrix ``F`` paired with a residual ``f``.

    Parameters
    ----------
    F : (p, m) array_like
        Columns are residual differences, oldest first.
    f : (p,) array_like
        Current residual.

    Notes
    -----
    With ``F = U diag(d) V^T``, the ridge solution of ``min ||f - F g||`` at
    level ``lam`` is ``g(lam) = V diag(d / (d^2 + lam)) U^T f`` and its
    squared norm is available in O(m) per level, which keeps the damping
    root-solve cheap.
    """

    def __init__(self, F, f):
        F = np.asarray(F, dtype=np.float64)
        f = np.asarray(f, dtype=np.float64).ravel()
        if F.ndim != 2:
            raise ValueError(f"window must be 2-d, got ndim={F.ndim}")
        if f.shape[0] != F.shape[0]:
            raise ValueError(
                f"residual length {f.shape[0]} does not match window rows {F.shape[0]}"
            )
        self.n_cols = F.shape[1]
        U, d, Vt = np.linalg.svd(F, full_matrices=False)
        self.d = d
        self.V = Vt.T
        self.uf = U.T @ f

    @property
    def condition_number(self):
        """Ratio of extreme singular values, ``inf`` for a numerically
        rank-deficient window (smallest at most ``RANK_TOL`` times the
        largest, the same notion the exact solve uses)."""
        if self.d.size == 0 or self.d[-1] <= RANK_TOL * self.d[0]:
            return float("inf")
        return float(self.d[0] / self.d[-1])

    def gamma(self, lam):
        """Ridge coefficient vector at level ``lam >= 0``."""
        d = self.d
        return self.V @ (d * self.uf / (d * d + lam))

    def coef_sqnorm(self, lam):
        """Squared norm ``||gamma(lam)||^2`` without forming the vector."""
        d = self.d
        c = d * self.uf / (d * d + lam)
        return float(c @ c)

    def ls_gamma(self):
        """Minimum-norm least-squares coefficients (pseudo-inverse solve)."""
        d = self.d
        keep = d > (d[0] * _PINV_TOL if d.size and d[0] > 0 else 0.0)
        return self.V[:, keep] @ (self.uf[keep] / d[keep])

    def exact_gamma(self):
        """Unregularized solve; raises if the window is rank deficient."""
        d = self.d
        if d.size == 0 or d[-1] <= RANK_TOL * d[0]:
            raise np.linalg.LinAlgError(
                "window is rank deficient, unregularized solve is not defined"
            )
        return self.V @ (self.uf / d)

    def damped_gamma(self, delta):
        """Damping level and coefficients matching a squared-norm budget.

        Finds ``lam >= 0`` with ``||gamma(lam)||^2 = delta * ||gamma_LS||^2``
        by bisection on ``log(lam + lam_floor)``, where ``lam_floor`` is
        ``1e-16`` times the squared top singular value, over the bracket
        ``[lam_floor, 1e16 * dmax^2]``.  ``delta = 1`` short-circuits to the
        least-squares solution, and a zero window or zero least-squares
        solution returns zero coefficients.

        Returns
        -------
        (lam, gamma) : float, ndarray
        """
        if not 0.0 < delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {delta}")
        m = self.V.shape[0]
        if self.d.size == 0 or self.d[0] == 0.0:
            return 0.0, np.zeros(m)
        gls = self.ls_gamma()
        ls_sq = float(gls @ gls)
        if ls_sq == 0.0:
            return 0.0, np.zeros(m)
        if delta == 1.0:
            return 0.0, gls
        target = delta * ls_sq
        dmax2 = float(self.d[0]) ** 2
        floor = 1e-16 * dmax2
        lam_hi = 1e16 * dmax2
        if self.coef_sqnorm(floor) <= target:
            # even the smallest representable damping already meets the budget
            return floor, self.gamma(floor)
        if self.coef_sqnorm(lam_hi) >= target:  # pragma: no cover - unreachable
            return lam_hi, self.gamma(lam_hi)
        u_lo = math.log(floor + floor)
        u_hi = math.log(lam_hi + floor)
        lam = floor
        for _ in range(200):
            u_mid = 0.5 * (u_lo + u_hi)
            lam = max(math.exp(u_mid) - floor, 0.0)
            gap = self.coef_sqnorm(lam) - target
            if abs(gap) <= 1e-12 * target:
                break
            if gap > 0.0:
                u_lo = u_mid
            else:
                u_hi = u_mid
        return lam, self.gamma(lam)


def condition_number(F):
    """Condition number of a window matrix (largest over smallest singular
    value, ``inf`` when the smallest is zero, 1 for any nonzero single
    column)."""
    return WindowSVD(F, np.zeros(np.asarray(F).shape[0])).condition_number


def reg_ls_solve(F, f, lam=0.0):
    """Solve ``min_g ||f - F g||`` with ridge level ``lam``.

    ``lam = 0`` requests the exact solve and raises
    ``numpy.linalg.LinAlgError`` when the window is rank deficient (smallest
    singular value at most ``1e-12`` times the largest).
    """
    if lam < 0:
        raise ValueError(f"ridge level must be nonnegative, got {lam}")
    svd = WindowSVD(F, f)
    if lam == 0.0:
        return svd.exact_gamma()
    return svd.gamma(lam)


def damping_solve(F, f, delta):
    """Damping level and coefficients for a fresh window; see
    :meth:`WindowSVD.damped_gamma`."""
    return WindowSVD(F, f).damped_gamma(delta)
