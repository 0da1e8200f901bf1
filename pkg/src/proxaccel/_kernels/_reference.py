"""NumPy reference implementations of the elementwise kernels.

These are the fallback used when the compiled extension is unavailable and
the ground truth the compiled path is tested against.
"""

import numpy as np

BACKEND = "numpy"


def soft_threshold(x, s):
    """Shrink each entry of ``x`` toward zero by ``s``, clamping at zero."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - s, 0.0)


def clip_box(x, lo, hi):
    """Clamp each entry of ``x`` into the interval [lo, hi]."""
    x = np.asarray(x, dtype=np.float64)
    return np.clip(x, lo, hi)


def sigmoid(u):
    """Logistic function 1/(1+exp(-u)), overflow-safe for large |u|."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def log1p_exp(u):
    """Elementwise log(1+exp(u)), overflow-safe for large |u|."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    pos = u > 0
    out[pos] = u[pos] + np.log1p(np.exp(-u[pos]))
    out[~pos] = np.log1p(np.exp(u[~pos]))
    return out
