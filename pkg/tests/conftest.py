"""Shared fixtures: one small seeded instance per backend.

Sized so the whole non-acceptance suite runs in seconds; the acceptance
tests build their own larger instances.
"""

import numpy as np
import pytest

from proxaccel import (
    BoxQPProblem,
    CompletionSimSpec,
    LassoProblem,
    LassoSimSpec,
    LogisticProblem,
    MatrixCompletionProblem,
    QPSimSpec,
    gen_completion_data,
    gen_lasso_data,
    gen_logistic_data,
    gen_qp,
    lambda_max_completion,
    lambda_max_lasso,
    lambda_max_logistic,
)


@pytest.fixture(scope="session")
def lasso_small():
    X, y, _ = gen_lasso_data(LassoSimSpec(n=40, p=60, rho=0.5, seed=3))
    return LassoProblem(X, y, 0.1 * lambda_max_lasso(X, y))


@pytest.fixture(scope="session")
def logistic_small():
    X, y, _ = gen_logistic_data(LassoSimSpec(n=60, p=30, rho=0.3, seed=4))
    return LogisticProblem(X, y, 0.05 * lambda_max_logistic(X, y))


@pytest.fixture(scope="session")
def completion_small():
    rows, cols, vals, _ = gen_completion_data(
        CompletionSimSpec(n_rows=20, n_cols=15, rank=2, seed=5)
    )
    lam = 0.2 * lambda_max_completion(20, 15, rows, cols, vals)
    return MatrixCompletionProblem(20, 15, rows, cols, vals, lam)


@pytest.fixture(scope="session")
def qp_small():
    Q, q = gen_qp(QPSimSpec(p=30, cond=1e3, seed=6))
    return BoxQPProblem(Q, q)


@pytest.fixture(scope="session")
def all_backends(lasso_small, logistic_small, completion_small, qp_small):
    return {
        "lasso": lasso_small,
        "logistic": logistic_small,
        "completion": completion_small,
        "box_qp": qp_small,
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
