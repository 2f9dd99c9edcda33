"""Small dense linear algebra shared by every other module.

All geometry lives in orthonormal coordinates, so the metric is the identity
and inner products are plain dot products.  Vectors are 1-d float arrays,
operators are square 2-d arrays, and subspaces carry an orthonormal basis
stored as the *rows* of a 2-d array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimension, RankDeficient, VectorNotInSubspace

RANK_TOL = 1e-10
ORTHO_TOL = 1e-12
MAX_DIM = 64

Vec = np.ndarray
SymOp = np.ndarray
SkewOp = np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def sym_op(a) -> SymOp:
    """Return the symmetric part of ``a`` as a read-only array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BadDimension(f"expected a square array, got shape {a.shape}")
    return _frozen(0.5 * (a + a.T))


def skew_op(a) -> SkewOp:
    """Return the skew part of ``a`` as a read-only array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise BadDimension(f"expected a square array, got shape {a.shape}")
    return _frozen(0.5 * (a - a.T))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace given by an orthonormal basis (one vector per row)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if b.shape[0] == 0 or b.shape[0] > b.shape[1]:
            raise BadDimension(f"basis shape {b.shape} is not a frame")
        gram_err = np.max(np.abs(b @ b.T - np.eye(b.shape[0])))
        if gram_err > ORTHO_TOL:
            raise RankDeficient(f"basis is not orthonormal (Gram error {gram_err:.3e})")
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def project(self, v: Vec) -> Vec:
        return self.basis.T @ (self.basis @ v)

    def contains(self, v: Vec, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.linalg.norm(v - self.project(v)) <= tol * max(1.0, np.linalg.norm(v)))

    def completion_from(self, u: Vec) -> np.ndarray:
        """Orthonormal basis of the subspace whose first row is the unit vector ``u``."""
        u = np.asarray(u, dtype=float)
        if not self.contains(u):
            raise VectorNotInSubspace("vector does not lie in the subspace")
        coords = self.basis @ u
        rest = orthonormal_complement(coords[None, :], self.dim)
        return np.vstack([u[None, :], rest @ self.basis])

    def to_list(self) -> list:
        return self.basis.tolist()


def orthonormalize(vs) -> Subspace:
    """Gram-Schmidt (two passes) preserving order and span.

    Raises RankDeficient when some vector's component outside the span of
    its predecessors falls below ``RANK_TOL`` relative to its length.
    """
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    out = []
    for v in vs:
        scale = np.linalg.norm(v)
        w = v.copy()
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if scale == 0.0 or norm <= RANK_TOL * scale:
            raise RankDeficient(f"numerical rank below {len(vs)}")
        out.append(w / norm)
    return Subspace(np.array(out))


def orthonormal_complement(basis: np.ndarray, dim: int) -> np.ndarray:
    """Rows spanning the orthogonal complement of the orthonormal rows ``basis`` in R^dim.

    Standard basis vectors are added greedily by largest residual, so a
    coordinate-aligned input yields a coordinate-aligned complement.
    """
    basis = np.asarray(basis, dtype=float).reshape(-1, dim)
    frame = [row for row in basis]
    out = []
    for _ in range(dim - len(basis)):
        resid = np.eye(dim)
        for q in frame:
            resid = resid - np.outer(resid @ q, q)
        for q in frame:
            resid = resid - np.outer(resid @ q, q)
        norms = np.linalg.norm(resid, axis=1)
        j = int(np.argmax(norms))
        w = resid[j] / norms[j]
        frame.append(w)
        out.append(w)
    return np.array(out).reshape(-1, dim)


def min_eigenvalue(a: SymOp) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[0])


def random_orthogonal(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed orthogonal matrix, deterministic in ``seed``."""
    if dim < 1:
        raise BadDimension("dim must be positive")
    return random_orthogonal_batch(np.random.default_rng(seed), 1, dim)[0]


def random_orthogonal_batch(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((count, dim, dim))
    q, r = np.linalg.qr(z)
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def random_unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
