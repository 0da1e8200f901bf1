"""Composite objectives and the proximal gradient step.

A composite problem is ``phi(x) = smooth(x) + nonsmooth(x)`` where the smooth
part has a Lipschitz gradient and the nonsmooth part has a cheap proximal
mapping.  Everything downstream (plain proximal gradient, momentum methods,
the Anderson-type accelerators) is built from the single primitive

    pg_step(problem, x, t) = prox(x - t * grad smooth(x), t)

and its fixed-point residual ``pg_step(x) - x``, which is zero exactly at
minimizers and drives every stopping rule in the package.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CompositeProblem",
    "FunctionProblem",
    "StepConfig",
    "pg_step",
    "residual",
    "objective",
    "converged",
]


class CompositeProblem:
    """Base class for composite objectives.

    Subclasses set ``dim`` (length of the flat parameter vector) and
    ``lipschitz`` (an upper bound on the Lipschitz constant of the smooth
    gradient) and implement the four evaluation methods.  Instances are
    treated as immutable after construction; solvers never mutate them, so
    one instance can be shared across runs and threads.
    """

    dim: int
    lipschitz: float

    def smooth(self, x):
        """Value of the differentiable part at ``x``."""
        raise NotImplementedError

    def smooth_grad(self, x):
        """Gradient of the differentiable part at ``x``."""
        raise NotImplementedError

    def nonsmooth(self, x):
        """Value of the nonsmooth part at ``x`` (may be ``inf``)."""
        raise NotImplementedError

    def prox(self, x, step):
        """Proximal mapping of ``step * nonsmooth`` at ``x``.

        Returns the minimizer of ``step * nonsmooth(z) + 0.5 * ||z - x||^2``.
        """
        raise NotImplementedError

    def default_step(self):
        """Default step size ``1 / lipschitz``."""
        return 1.0 / self.lipschitz


class FunctionProblem(CompositeProblem):
    """Composite problem assembled from plain callables.

    Parameters
    ----------
    dim : int
        Parameter dimension.
    smooth, smooth_grad : callable
        Value and gradient of the differentiable part.
    lipschitz : float
        Upper bound on the gradient's Lipschitz constant, must be positive.
    nonsmooth : callable, optional
        Value of the nonsmooth part; defaults to zero.
    prox : callable ``(x, step) -> ndarray``, optional
        Proximal mapping; defaults to the identity (matching a zero
        nonsmooth part).
    """

    def __init__(self, dim, smooth, smooth_grad, lipschitz, nonsmooth=None, prox=None):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        if not np.isfinite(lipschitz) or lipschitz <= 0:
            raise ValueError(f"lipschitz must be positive and finite, got {lipschitz}")
        self.dim = int(dim)
        self.lipschitz = float(lipschitz)
        self._smooth = smooth
        self._smooth_grad = smooth_grad
        self._nonsmooth = nonsmooth
        self._prox = prox

    def smooth(self, x):
        return float(self._smooth(x))

    def smooth_grad(self, x):
        return np.asarray(self._smooth_grad(x), dtype=np.float64)

    def nonsmooth(self, x):
        if self._nonsmooth is None:
            return 0.0
        return float(self._nonsmooth(x))

    def prox(self, x, step):
        if self._prox is None:
            return np.asarray(x, dtype=np.float64)
        return np.asarray(self._prox(x, step), dtype=np.float64)


@dataclass
class StepConfig:
    """Step size and stopping policy shared by all solvers.

    ``step=None`` means use the problem's ``1 / lipschitz`` default.  A run
    stops once the fixed-point residual norm falls to ``eps_stop`` or after
    ``max_iter`` outer iterations, whichever comes first.
    """

    step: float | None = None
    eps_stop: float = 1e-8
    max_iter: int = 100_000

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.eps_stop <= 0:
            raise ValueError(f"eps_stop must be positive, got {self.eps_stop}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")

    def resolve_step(self, problem):
        """Concrete step size for ``problem``."""
        if self.step is not None:
            return float(self.step)
        return problem.default_step()


def pg_step(problem, x, step):
    """One proximal gradient step ``prox(x - step * grad, step)``.

    Raises ``FloatingPointError`` if the gradient contains a non-finite
    entry, naming the first offending coordinate.
    """
    grad = problem.smooth_grad(x)
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise FloatingPointError(
            f"non-finite gradient entry {grad[bad]!r} at coordinate {bad}"
        )
    return problem.prox(x - step * grad, step)


def residual(problem, x, step):
    """Fixed-point residual ``pg_step(problem, x, step) - x``.

    Zero exactly at minimizers of the composite objective.
    """
    return pg_step(problem, x, step) - x


def objective(problem, x):
    """Composite objective value ``smooth(x) + nonsmooth(x)``."""
    return problem.smooth(x) + problem.nonsmooth(x)


def converged(resid, eps_stop):
    """Whether the residual vector's Euclidean norm is at most ``eps_stop``."""
    return bool(np.linalg.norm(resid) <= eps_stop)
