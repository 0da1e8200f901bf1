"""Seeded synthetic problem generators and plain-text data loaders.

Generators are pure functions of their spec: the seed keys a counter-based
bit generator (Philox) and every output array draws from its own spawned
stream, so the same seed reproduces bit-identical data and enlarging one
array never perturbs the others.  Loaders read delimited text and fail with
line numbers on malformed input.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .problems import MatrixCompletionProblem

__all__ = [
    "LassoSimSpec",
    "QPSimSpec",
    "CompletionSimSpec",
    "gen_lasso_data",
    "gen_logistic_data",
    "gen_qp",
    "gen_completion_data",
    "load_ratings",
    "load_design",
]


@dataclass(frozen=True)
class LassoSimSpec:
    """Regression design recipe: ``n`` rows of AR(1)-correlated standard
    Gaussians (neighbor correlation ``rho``), coefficients zero with
    probability ``sparsity`` and heavy-tailed (t with 3 degrees of freedom)
    otherwise, unit-variance Gaussian noise on the response."""

    n: int
    p: int
    rho: float = 0.0
    sparsity: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError(f"dimensions must be positive, got ({self.n}, {self.p})")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must be in [0, 1), got {self.rho}")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError(f"sparsity must be in [0, 1], got {self.sparsity}")


@dataclass(frozen=True)
class QPSimSpec:
    """Box-QP recipe: random orthogonal basis, log-linear spectrum running
    from ``cond`` down to 1, linear term scaled to the per-column spread of
    the quadratic."""

    p: int
    cond: float
    noise_sd: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"p must be at least 2, got {self.p}")
        if self.cond < 1.0:
            raise ValueError(f"cond must be at least 1, got {self.cond}")
        if self.noise_sd < 0:
            raise ValueError(f"noise_sd must be nonnegative, got {self.noise_sd}")


@dataclass(frozen=True)
class CompletionSimSpec:
    """Matrix completion recipe: a rank-``rank`` product of Gaussian factors
    (scaled by ``1/sqrt(rank)``), observed on a uniform random subset of
    entries with Gaussian noise."""

    n_rows: int
    n_cols: int
    rank: int = 3
    obs_fraction: float = 0.5
    noise_sd: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(
                f"matrix shape must be positive, got ({self.n_rows}, {self.n_cols})"
            )
        if self.rank < 1 or self.rank > min(self.n_rows, self.n_cols):
            raise ValueError(f"rank {self.rank} out of range for shape")
        if not 0.0 < self.obs_fraction <= 1.0:
            raise ValueError(f"obs_fraction must be in (0, 1], got {self.obs_fraction}")
        if self.noise_sd < 0:
            raise ValueError(f"noise_sd must be nonnegative, got {self.noise_sd}")


def _streams(seed, count):
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _ar1_design(rng, n, p, rho):
    # first-order recursion across columns: X_1 = Z_1, X_j = rho X_{j-1}
    # + sqrt(1-rho^2) Z_j, which reproduces corr(X_j, X_k) = rho^{|k-j|}
    # exactly without factoring the p x p covariance
    Z = rng.standard_normal((n, p))
    if rho == 0.0:
        return Z
    X = np.empty_like(Z)
    X[:, 0] = Z[:, 0]
    w = np.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + w * Z[:, j]
    return X


def _sparse_heavy_coefs(rng, p, sparsity):
    # t_3 built explicitly as normal over sqrt(chisq_3 / 3); the zero mask
    # is drawn first and the full t vector is drawn regardless, keeping the
    # stream layout independent of the realized support
    u = rng.random(p)
    z = rng.standard_normal(p)
    chi = rng.chisquare(3.0, p)
    t = z / np.sqrt(chi / 3.0)
    return np.where(u < sparsity, 0.0, t)


def gen_lasso_data(spec):
    """Generate ``(X, y, beta_true)`` from a :class:`LassoSimSpec`.

    ``y = X beta + e`` with standard-normal ``e``.  Three spawned streams
    drive the design, the coefficients, and the noise.
    """
    rng_x, rng_b, rng_e = _streams(spec.seed, 3)
    X = _ar1_design(rng_x, spec.n, spec.p, spec.rho)
    beta = _sparse_heavy_coefs(rng_b, spec.p, spec.sparsity)
    y = X @ beta + rng_e.standard_normal(spec.n)
    return X, y, beta


def gen_logistic_data(spec):
    """Generate ``(X, y, beta_true)`` with Bernoulli responses.

    Same design and coefficient recipe as :func:`gen_lasso_data`; labels are
    Bernoulli draws with success probability ``sigmoid(X beta)``.
    """
    rng_x, rng_b, rng_e = _streams(spec.seed, 3)
    X = _ar1_design(rng_x, spec.n, spec.p, spec.rho)
    beta = _sparse_heavy_coefs(rng_b, spec.p, spec.sparsity)
    probs = kernels.sigmoid(X @ beta)
    y = (rng_e.random(spec.n) < probs).astype(np.float64)
    return X, y, beta


def gen_qp(spec):
    """Generate ``(Q, q)`` from a :class:`QPSimSpec`.

    ``Q = U diag(d) U^T`` where ``U`` is the orthogonal polar factor of a
    square standard-Gaussian draw ``B`` (computed from the symmetric
    eigendecomposition of ``B^T B``) and ``log d_j`` falls linearly from
    ``log(cond)`` to 0, so the spectrum of ``Q`` runs from ``cond`` down to
    1 and its condition number equals ``cond``.  Each ``q_j`` is a centered
    Gaussian with standard deviation ``noise_sd`` times the sample standard
    deviation of column ``j`` of ``Q``.  A singular Gram draw (probability
    zero) is retried at most 3 times.
    """
    rng_b, rng_q = _streams(spec.seed, 2)
    p = spec.p
    w = None
    for _ in range(3):
        B = rng_b.standard_normal((p, p))
        w, V = np.linalg.eigh(B.T @ B)
        if w[0] > p * np.finfo(np.float64).eps * w[-1]:
            break
        w = None
    if w is None:
        raise np.linalg.LinAlgError("Gram matrix singular after 3 draws")
    U = B @ ((V / np.sqrt(w)) @ V.T)
    exponents = 1.0 - np.arange(p) / (p - 1.0)
    d = np.exp(np.log(spec.cond) * exponents)
    Q = (U * d) @ U.T
    Q = 0.5 * (Q + Q.T)
    col_sd = np.sqrt(np.sum((Q - Q.mean(axis=0)) ** 2, axis=0) / (p - 1.0))
    q = rng_q.standard_normal(p) * spec.noise_sd * col_sd
    return Q, q


def gen_completion_data(spec):
    """Generate ``(rows, cols, vals, full)`` from a :class:`CompletionSimSpec`.

    ``full`` is the complete low-rank-plus-nothing ground truth; the triples
    observe ``round(obs_fraction * n_rows * n_cols)`` distinct entries of it
    with additive Gaussian noise.  Four spawned streams drive the two
    factors, the observation mask, and the noise.
    """
    rng_l, rng_r, rng_m, rng_e = _streams(spec.seed, 4)
    L = rng_l.standard_normal((spec.n_rows, spec.rank))
    R = rng_r.standard_normal((spec.n_cols, spec.rank))
    full = (L @ R.T) / np.sqrt(spec.rank)
    total = spec.n_rows * spec.n_cols
    n_obs = max(1, int(round(spec.obs_fraction * total)))
    flat = np.sort(rng_m.choice(total, size=n_obs, replace=False))
    rows, cols = np.divmod(flat, spec.n_cols)
    vals = full[rows, cols] + spec.noise_sd * rng_e.standard_normal(n_obs)
    return rows, cols, vals, full


def load_ratings(path, penalty=0.0, n_rows=None, n_cols=None):
    """Load a tab-separated ratings file into a completion problem.

    Each line is ``user<TAB>item<TAB>rating<TAB>timestamp`` with 1-indexed
    integer ids; ids are shifted to 0-indexed and the timestamp is ignored.
    Blank lines are skipped.  Malformed lines, out-of-range ids, and
    duplicate (user, item) pairs are rejected with their line numbers.
    Matrix shape is inferred from the largest ids unless given.
    """
    rows, cols, vals = [], [], []
    seen = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise ValueError(
                    f"{path}: line {lineno}: expected 4 tab-separated fields, "
                    f"got {len(parts)}"
                )
            try:
                user = int(parts[0])
                item = int(parts[1])
                rating = float(parts[2])
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric user, item, or rating"
                ) from None
            if user < 1 or item < 1:
                raise ValueError(
                    f"{path}: line {lineno}: ids are 1-indexed, got ({user}, {item})"
                )
            if not np.isfinite(rating):
                raise ValueError(f"{path}: line {lineno}: non-finite rating")
            key = (user - 1, item - 1)
            if key in seen:
                raise ValueError(
                    f"{path}: line {lineno}: duplicate rating for user {user}, "
                    f"item {item} (first seen at line {seen[key]})"
                )
            seen[key] = lineno
            rows.append(user - 1)
            cols.append(item - 1)
            vals.append(rating)
    if not rows:
        raise ValueError(f"{path}: no observations")
    n_rows = max(rows) + 1 if n_rows is None else int(n_rows)
    n_cols = max(cols) + 1 if n_cols is None else int(n_cols)
    return MatrixCompletionProblem(n_rows, n_cols, rows, cols, vals, penalty)


def _load_matrix(path):
    rows = []
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            fields = [f for f in stripped.replace(",", " ").split() if f]
            try:
                parsed = [float(f) for f in fields]
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric field"
                ) from None
            if width is None:
                width = len(parsed)
            elif len(parsed) != width:
                raise ValueError(
                    f"{path}: line {lineno}: expected {width} fields, "
                    f"got {len(parsed)}"
                )
            rows.append(parsed)
    if not rows:
        raise ValueError(f"{path}: no data")
    return np.array(rows, dtype=np.float64)


def load_design(path_X, path_y):
    """Load a dense design matrix and response vector from delimited text.

    Comma- and whitespace-delimited input parse identically.  The response
    file must hold a single column (or single row), with as many entries as
    the design has rows.
    """
    X = _load_matrix(path_X)
    y = _load_matrix(path_y)
    if y.shape[1] == 1:
        y = y[:, 0]
    elif y.shape[0] == 1:
        y = y[0]
    else:
        raise ValueError(f"{path_y}: response must be a single column, got shape {y.shape}")
    if y.shape[0] != X.shape[0]:
        raise ValueError(
            f"response length {y.shape[0]} does not match design rows {X.shape[0]}"
        )
    return X, y
