"""Concrete composite problems: lasso, l1 logistic regression, nuclear-norm
matrix completion, and box-constrained quadratic programming.

Each backend fixes the four evaluations of :class:`~proxaccel.core.CompositeProblem`
and certifies a Lipschitz bound for its smooth gradient, so every solver in
:mod:`proxaccel.solvers` runs unchanged on all of them.  The scalar prox and
projection kernels live here as free functions because they are useful on
their own.
"""

import numpy as np

from . import _kernels as kernels
from .core import CompositeProblem

__all__ = [
    "soft_threshold",
    "svd_soft_threshold",
    "box_project",
    "LassoProblem",
    "LogisticProblem",
    "MatrixCompletionProblem",
    "BoxQPProblem",
]


def soft_threshold(x, s):
    """Elementwise soft threshold, the prox of ``s * l1 norm``.

    Maps ``x_i`` to ``x_i - s`` when ``x_i > s``, to ``x_i + s`` when
    ``x_i < -s``, and to zero otherwise.
    """
    if s < 0:
        raise ValueError(f"threshold must be nonnegative, got {s}")
    return kernels.soft_threshold(np.asarray(x, dtype=np.float64), float(s))


def svd_soft_threshold(Z, s):
    """Singular value soft threshold, the prox of ``s * nuclear norm``.

    Soft thresholds the singular values of ``Z`` by ``s`` and recomposes.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={Z.ndim}")
    if s < 0:
        raise ValueError(f"threshold must be nonnegative, got {s}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("matrix has non-finite entries")
    U, d, Vt = np.linalg.svd(Z, full_matrices=False)
    d = np.maximum(d - s, 0.0)
    return (U * d) @ Vt


def box_project(x, lo=-1.0, hi=1.0):
    """Euclidean projection of ``x`` onto the box ``[lo, hi]^p``."""
    if lo > hi:
        raise ValueError(f"empty box: lo={lo} > hi={hi}")
    return kernels.clip_box(np.asarray(x, dtype=np.float64), float(lo), float(hi))


def _certified_max_eig(matvec, dim, rel_tol=1e-10, max_iter=5000, inflate=1e-6):
    """Upper bound on the top eigenvalue of a symmetric PSD operator.

    Power iteration from a fixed random start, run to ``rel_tol`` relative
    change in the Rayleigh quotient (at most ``max_iter`` products), then
    inflated by ``1 + inflate`` so the returned value sits above the true
    eigenvalue despite the estimate converging from below.
    """
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    rayleigh = 0.0
    for _ in range(max_iter):
        w = np.asarray(matvec(v), dtype=np.float64)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # v landed in the null space; restart from a fresh direction
            v = rng.standard_normal(dim)
            v /= np.linalg.norm(v)
            continue
        new = float(v @ w)
        v = w / nw
        if new > 0 and abs(new - rayleigh) <= rel_tol * new:
            rayleigh = new
            break
        rayleigh = new
    if rayleigh <= 0:
        raise ValueError("smooth part has no positive curvature, cannot certify a step size")
    return rayleigh * (1.0 + inflate)


def _check_design(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"design matrix must be 2-d, got ndim={X.ndim}")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(
            f"response length {y.shape} does not match design rows {X.shape[0]}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix has non-finite entries")
    if not np.all(np.isfinite(y)):
        raise ValueError("response has non-finite entries")
    return X, y


class LassoProblem(CompositeProblem):
    """Least squares with an l1 penalty.

    smooth(b)    = 0.5 * ||y - X b||^2
    nonsmooth(b) = penalty * ||b||_1

    The certified Lipschitz bound is the top eigenvalue of ``X^T X``.

    Parameters
    ----------
    X : (n, p) array_like
    y : (n,) array_like
    penalty : float
        Nonnegative l1 weight.
    lipschitz : float, optional
        Caller-supplied bound, e.g. reused across a penalty path; computed
        by power iteration when omitted.
    """

    def __init__(self, X, y, penalty, lipschitz=None):
        self.X, self.y = _check_design(X, y)
        if penalty < 0:
            raise ValueError(f"penalty must be nonnegative, got {penalty}")
        self.penalty = float(penalty)
        self.dim = self.X.shape[1]
        if lipschitz is None:
            X_ = self.X
            lipschitz = _certified_max_eig(lambda v: X_.T @ (X_ @ v), self.dim)
        self.lipschitz = float(lipschitz)

    def smooth(self, x):
        r = self.X @ x - self.y
        return 0.5 * float(r @ r)

    def smooth_grad(self, x):
        return self.X.T @ (self.X @ x - self.y)

    def nonsmooth(self, x):
        return self.penalty * float(np.sum(np.abs(x)))

    def prox(self, x, step):
        return kernels.soft_threshold(x, step * self.penalty)


class LogisticProblem(CompositeProblem):
    """Binary logistic regression with an l1 penalty.

    smooth(b)    = sum_i log(1 + exp(x_i^T b)) - y^T X b    with y in {0,1}
    nonsmooth(b) = penalty * ||b||_1

    Evaluations route through overflow-safe kernels, so linear predictors
    with magnitude up to several hundred are handled exactly.  The certified
    Lipschitz bound is the top eigenvalue of ``X^T X`` divided by 4.
    """

    def __init__(self, X, y, penalty, lipschitz=None):
        self.X, self.y = _check_design(X, y)
        if not np.all((self.y == 0.0) | (self.y == 1.0)):
            raise ValueError("logistic responses must be 0 or 1")
        if penalty < 0:
            raise ValueError(f"penalty must be nonnegative, got {penalty}")
        self.penalty = float(penalty)
        self.dim = self.X.shape[1]
        if lipschitz is None:
            X_ = self.X
            lipschitz = _certified_max_eig(lambda v: X_.T @ (X_ @ v), self.dim) / 4.0
        self.lipschitz = float(lipschitz)

    def smooth(self, x):
        u = self.X @ x
        return float(np.sum(kernels.log1p_exp(u)) - self.y @ u)

    def smooth_grad(self, x):
        u = self.X @ x
        return self.X.T @ (kernels.sigmoid(u) - self.y)

    def nonsmooth(self, x):
        return self.penalty * float(np.sum(np.abs(x)))

    def prox(self, x, step):
        return kernels.soft_threshold(x, step * self.penalty)


class MatrixCompletionProblem(CompositeProblem):
    """Nuclear-norm penalized completion of a partially observed matrix.

    The parameter vector is an ``n_rows x n_cols`` matrix stored flat in row
    major order.  With ``O`` the observed index set,

    smooth(Z)    = 0.5 * sum_{(i,j) in O} (Z_ij - A_ij)^2
    nonsmooth(Z) = penalty * (sum of singular values of Z)

    The smooth gradient is the observed-entry residual scattered into an
    otherwise zero matrix, whose Lipschitz constant is exactly 1.  With unit
    step the proximal gradient step reproduces the classic impute-and-shrink
    update ``D_penalty(Z - P_O(Z) + P_O(A))``.

    Exact duplicate observations are collapsed; duplicates with conflicting
    values are rejected.
    """

    def __init__(self, n_rows, n_cols, rows, cols, vals, penalty):
        n_rows, n_cols = int(n_rows), int(n_cols)
        if n_rows < 1 or n_cols < 1:
            raise ValueError(f"matrix shape must be positive, got ({n_rows}, {n_cols})")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols, vals must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows
                          or cols.min() < 0 or cols.max() >= n_cols):
            raise ValueError("observed index out of range for matrix shape")
        if not np.all(np.isfinite(vals)):
            raise ValueError("observed values have non-finite entries")
        if penalty < 0:
            raise ValueError(f"penalty must be nonnegative, got {penalty}")

        flat = rows * n_cols + cols
        order = np.argsort(flat, kind="stable")
        flat, vals = flat[order], vals[order]
        dup = np.flatnonzero(flat[1:] == flat[:-1])
        if dup.size:
            clash = dup[vals[dup + 1] != vals[dup]]
            if clash.size:
                i, j = divmod(int(flat[clash[0]]), n_cols)
                raise ValueError(
                    f"conflicting duplicate observations at entry ({i}, {j})"
                )
            keep = np.ones(flat.size, dtype=bool)
            keep[dup + 1] = False
            flat, vals = flat[keep], vals[keep]

        self.n_rows, self.n_cols = n_rows, n_cols
        self.observed_flat = flat
        self.observed_vals = vals
        self.penalty = float(penalty)
        self.dim = n_rows * n_cols
        self.lipschitz = 1.0

    @property
    def observed_rows(self):
        return self.observed_flat // self.n_cols

    @property
    def observed_cols(self):
        return self.observed_flat % self.n_cols

    def smooth(self, x):
        d = np.asarray(x).ravel()[self.observed_flat] - self.observed_vals
        return 0.5 * float(d @ d)

    def smooth_grad(self, x):
        g = np.zeros(self.dim)
        flat = np.asarray(x).ravel()
        g[self.observed_flat] = flat[self.observed_flat] - self.observed_vals
        return g

    def nonsmooth(self, x):
        Z = np.asarray(x).reshape(self.n_rows, self.n_cols)
        return self.penalty * float(np.linalg.svd(Z, compute_uv=False).sum())

    def prox(self, x, step):
        Z = np.asarray(x).reshape(self.n_rows, self.n_cols)
        return svd_soft_threshold(Z, step * self.penalty).ravel()


class BoxQPProblem(CompositeProblem):
    """Convex quadratic minimized over the box ``[-1, 1]^p``.

    smooth(x)    = 0.5 * x^T Q x + q^T x      with Q symmetric PSD
    nonsmooth(x) = 0 on the box, +inf outside (exact membership test)

    The prox is coordinatewise clamping regardless of step size, and the
    certified Lipschitz bound is the top eigenvalue of ``Q``.
    """

    def __init__(self, Q, q, lipschitz=None):
        Q = np.ascontiguousarray(Q, dtype=np.float64)
        q = np.ascontiguousarray(q, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        if q.shape != (Q.shape[0],):
            raise ValueError(f"q shape {q.shape} does not match Q shape {Q.shape}")
        if not np.all(np.isfinite(Q)) or not np.all(np.isfinite(q)):
            raise ValueError("Q or q has non-finite entries")
        if not np.allclose(Q, Q.T, rtol=1e-12, atol=1e-12):
            raise ValueError("Q must be symmetric")
        self.Q, self.q = Q, q
        self.dim = Q.shape[0]
        if lipschitz is None:
            lipschitz = _certified_max_eig(lambda v: Q @ v, self.dim)
        self.lipschitz = float(lipschitz)

    def smooth(self, x):
        return 0.5 * float(x @ (self.Q @ x)) + float(self.q @ x)

    def smooth_grad(self, x):
        return self.Q @ x + self.q

    def nonsmooth(self, x):
        x = np.asarray(x)
        if np.all(np.abs(x) <= 1.0):
            return 0.0
        return float("inf")

    def prox(self, x, step):
        return kernels.clip_box(x, -1.0, 1.0)
