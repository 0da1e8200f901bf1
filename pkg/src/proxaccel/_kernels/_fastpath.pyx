# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused single-pass versions of the elementwise kernels.

Semantics match ``_reference`` exactly; each function makes one pass over
contiguous float64 input and writes a freshly allocated output.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p

cnp.import_array()

BACKEND = "compiled"


def soft_threshold(x, double s):
    """Shrink each entry of ``x`` toward zero by ``s``, clamping at zero."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double v
    for i in range(n):
        v = xv[i]
        if v > s:
            out[i] = v - s
        elif v < -s:
            out[i] = v + s
        else:
            out[i] = 0.0
    return out


def clip_box(x, double lo, double hi):
    """Clamp each entry of ``x`` into the interval [lo, hi]."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double v
    for i in range(n):
        v = xv[i]
        if v < lo:
            out[i] = lo
        elif v > hi:
            out[i] = hi
        else:
            out[i] = v
    return out


def sigmoid(u):
    """Logistic function 1/(1+exp(-u)), overflow-safe for large |u|."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uv = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double v, e
    for i in range(n):
        v = uv[i]
        if v >= 0.0:
            out[i] = 1.0 / (1.0 + exp(-v))
        else:
            e = exp(v)
            out[i] = e / (1.0 + e)
    return out


def log1p_exp(u):
    """Elementwise log(1+exp(u)), overflow-safe for large |u|."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] uv = np.ascontiguousarray(u, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = uv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double v
    for i in range(n):
        v = uv[i]
        if v > 0.0:
            out[i] = v + log1p(exp(-v))
        else:
            out[i] = log1p(exp(v))
    return out
