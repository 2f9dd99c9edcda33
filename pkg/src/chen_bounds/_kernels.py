"""Batched curvature kernels.

Two interchangeable implementations exist for each kernel: a numba
``@njit`` loop nest and a pure-numpy path built on BLAS matrix products.
``CHEN_BOUNDS_BACKEND=numpy`` forces the numpy path; the default is numba
when it imports, numpy otherwise.  Both backends take the curvature tensor
``R[i, j, k, l] = R(e_i, e_j, e_k, e_l)`` in an orthonormal frame.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_requested = os.environ.get("CHEN_BOUNDS_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"CHEN_BOUNDS_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"


def _pair_matrix(R: np.ndarray) -> np.ndarray:
    # rows index (i, l), columns index (j, k)
    n = R.shape[0]
    return np.ascontiguousarray(R.transpose(0, 3, 1, 2).reshape(n * n, n * n))


def sectional_batch_numpy(R, U, V):
    """K(u_s, v_s) = R(u, v, v, u) for each row pair; rows must be orthonormal pairs."""
    n = R.shape[0]
    x = (U[:, :, None] * U[:, None, :]).reshape(len(U), n * n)
    y = (V[:, :, None] * V[:, None, :]).reshape(len(V), n * n)
    return np.einsum("sa,sa->s", x @ _pair_matrix(R), y)


def frame_sectional_numpy(R, Q):
    """K[s, a, b] = R(q_a, q_b, q_b, q_a) for the frame rows q_a of each Q[s]."""
    n = R.shape[0]
    x = (Q[:, :, :, None] * Q[:, :, None, :]).reshape(Q.shape[0], Q.shape[1], n * n)
    return (x @ _pair_matrix(R)) @ x.transpose(0, 2, 1)


def bivector_operator(R: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Curvature operator on e_i ^ e_j (i < j) with K(u, v) = -p^T B p, p = u ^ v."""
    n = R.shape[0]
    I, J = np.triu_indices(n, 1)
    B = R[I[:, None], J[:, None], I[None, :], J[None, :]]
    return np.ascontiguousarray(B), I.astype(np.int64), J.astype(np.int64)


if HAVE_NUMBA:

    @njit(cache=True)
    def _sectional_bivector(B, I, J, U, V):
        m = I.shape[0]
        out = np.empty(U.shape[0])
        p = np.empty(m)
        for s in range(U.shape[0]):
            for a in range(m):
                p[a] = U[s, I[a]] * V[s, J[a]] - U[s, J[a]] * V[s, I[a]]
            acc = 0.0
            for a in range(m):
                row = 0.0
                for b in range(m):
                    row += B[a, b] * p[b]
                acc += p[a] * row
            out[s] = -acc
        return out

    @njit(cache=True)
    def _frame_bivector(B, I, J, Q):
        m = I.shape[0]
        kdim = Q.shape[1]
        out = np.zeros((Q.shape[0], kdim, kdim))
        p = np.empty(m)
        for s in range(Q.shape[0]):
            for a in range(kdim):
                for b in range(a + 1, kdim):
                    for c in range(m):
                        p[c] = Q[s, a, I[c]] * Q[s, b, J[c]] - Q[s, a, J[c]] * Q[s, b, I[c]]
                    acc = 0.0
                    for c in range(m):
                        row = 0.0
                        for e in range(m):
                            row += B[c, e] * p[e]
                        acc += p[c] * row
                    out[s, a, b] = -acc
                    out[s, b, a] = -acc
        return out

    def sectional_batch_numba(R, U, V):
        B, I, J = bivector_operator(R)
        return _sectional_bivector(B, I, J, U, V)

    def frame_sectional_numba(R, Q):
        B, I, J = bivector_operator(R)
        return _frame_bivector(B, I, J, Q)

else:  # pragma: no cover
    sectional_batch_numba = sectional_batch_numpy
    frame_sectional_numba = frame_sectional_numpy


def sectional_batch(R, U, V) -> np.ndarray:
    R = np.ascontiguousarray(R, dtype=float)
    U = np.ascontiguousarray(np.atleast_2d(U), dtype=float)
    V = np.ascontiguousarray(np.atleast_2d(V), dtype=float)
    if BACKEND == "numba":
        return sectional_batch_numba(R, U, V)
    return sectional_batch_numpy(R, U, V)


def frame_sectional(R, Q) -> np.ndarray:
    R = np.ascontiguousarray(R, dtype=float)
    Q = np.ascontiguousarray(Q, dtype=float)
    if Q.ndim == 2:
        Q = Q[None]
    if BACKEND == "numba":
        return frame_sectional_numba(R, Q)
    out = frame_sectional_numpy(R, Q)
    idx = np.arange(Q.shape[1])
    out[:, idx, idx] = 0.0
    return out
