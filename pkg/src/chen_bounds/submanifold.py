"""C-totally real tangent plane with its second fundamental form.

``sigma[r, i, j]`` is the component of sigma(e_i, e_j) along the normal
frame vector ``normal_frame[r]``; the last normal is always xi, whose shape
operator is forced to the tangential part of phi h.  Since the tangent frame
is orthonormal, ``sigma[r]`` is also the matrix of the shape operator A_r.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ambient import AmbientPoint, curvature_tensor_on
from .errors import AsymmetricSigma, BadFrame, NotCTotallyReal, NotTangent
from .linalg import ORTHO_TOL, Subspace, _frozen, orthonormal_complement

FRAME_TOL = 1e-12
CTR_TOL = 1e-10
NULL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SubmanifoldPoint:
    ambient: AmbientPoint
    tangent_frame: np.ndarray
    normal_frame: np.ndarray
    sigma: np.ndarray

    @property
    def n(self) -> int:
        return self.tangent_frame.shape[0]

    @property
    def codim(self) -> int:
        return self.normal_frame.shape[0]

    @property
    def shape_operators(self) -> np.ndarray:
        return self.sigma

    def to_ambient(self, coords) -> np.ndarray:
        """Tangent-frame coordinates to ambient vectors (works row-wise)."""
        return np.asarray(coords, dtype=float) @ self.tangent_frame

    def to_tangent(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        coords = x @ self.tangent_frame.T
        if np.linalg.norm(x - coords @ self.tangent_frame) > CTR_TOL * max(1.0, np.linalg.norm(x)):
            raise NotTangent("vector is not in the tangent space")
        return coords

    @cached_property
    def curvature(self) -> np.ndarray:
        """Induced R[i, j, k, l] in the tangent frame, via the Gauss equation."""
        T = curvature_tensor_on(self.ambient, self.tangent_frame)
        s = self.sigma
        T = T + np.einsum("ril,rjk->ijkl", s, s) - np.einsum("rik,rjl->ijkl", s, s)
        return _frozen(T)

    @cached_property
    def ambient_tangent_curvature(self) -> np.ndarray:
        return _frozen(curvature_tensor_on(self.ambient, self.tangent_frame))

    def to_dict(self) -> dict:
        r0 = self.n + 1
        return {
            "ambient": self.ambient.to_dict(),
            "n": self.n,
            "tangent_frame": self.tangent_frame.tolist(),
            "normal_frame": self.normal_frame.tolist(),
            # keys are 1-based frame indices n+1..2m; xi is recomputed on read
            "sigma": {str(r0 + r): self.sigma[r].tolist() for r in range(self.codim - 1)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SubmanifoldPoint":
        A = AmbientPoint.from_dict(data["ambient"])
        n = int(data["n"])
        tangent = np.array(data["tangent_frame"], dtype=float).reshape(n, A.dim)
        normal = np.array(data["normal_frame"], dtype=float).reshape(A.dim - n, A.dim)
        free = np.zeros((A.dim - n - 1, n, n))
        for key, block in data.get("sigma", {}).items():
            r = int(key) - n - 1
            if not 0 <= r < A.dim - n - 1:
                raise BadFrame(f"sigma key {key} is not a non-xi normal index")
            free[r] = np.array(block, dtype=float)
        return build_submanifold(A, tangent, normal, free)


def build_submanifold(A: AmbientPoint, tangent_frame, normal_frame, sigma_free) -> SubmanifoldPoint:
    """Validate frames and fill the xi-component of sigma from (phi h)^T."""
    d = A.dim
    E = np.atleast_2d(np.asarray(tangent_frame, dtype=float))
    N = np.atleast_2d(np.asarray(normal_frame, dtype=float))
    n = E.shape[0]
    if E.shape[1] != d or N.shape != (d - n, d):
        raise BadFrame(f"frames must be {n}x{d} and {d - n}x{d}, got {E.shape} and {N.shape}")
    if n < 2:
        raise BadFrame("submanifold dimension must be at least 2")
    full = np.vstack([E, N])
    gram_err = float(np.max(np.abs(full @ full.T - np.eye(d))))
    if gram_err > FRAME_TOL:
        raise BadFrame(f"joint frame is not orthonormal (Gram error {gram_err:.3e})")
    if np.max(np.abs(N[-1] - A.xi)) > FRAME_TOL:
        raise BadFrame("last normal frame vector must be xi")
    eta_res = float(np.max(np.abs(E[:, -1])))
    if eta_res > CTR_TOL:
        raise NotCTotallyReal(f"eta(e_i) != 0 (max residual {eta_res:.3e})")
    anti_res = float(np.max(np.abs(E @ A.phi @ E.T)))
    if anti_res > CTR_TOL:
        raise NotCTotallyReal(f"<phi e_i, e_j> != 0 (max residual {anti_res:.3e})")

    free = np.asarray(sigma_free, dtype=float).reshape(d - n - 1, n, n)
    if free.size and np.max(np.abs(free - free.transpose(0, 2, 1))) > 0.0:
        raise AsymmetricSigma("sigma^r_ij must equal sigma^r_ji")
    sigma = np.concatenate([free, tangential_phih_of(A, E)[None]], axis=0)
    return SubmanifoldPoint(A, _frozen(E), _frozen(N), _frozen(sigma))


def normal_completion(A: AmbientPoint, tangent_frame) -> np.ndarray:
    """Normal frame: phi e_1..phi e_n, then the rest of the contact distribution, then xi."""
    E = np.atleast_2d(np.asarray(tangent_frame, dtype=float))
    phiE = E @ A.phi.T
    start = np.vstack([E, phiE, A.xi[None]])
    rest = orthonormal_complement(start, A.dim)
    return np.vstack([phiE, rest, A.xi[None]])


def tangential_h_of(A: AmbientPoint, E) -> np.ndarray:
    return 0.5 * ((E @ A.h @ E.T) + (E @ A.h @ E.T).T)


def tangential_phih_of(A: AmbientPoint, E) -> np.ndarray:
    M = E @ A.phih.T @ E.T  # M[i, j] = <phi h e_i, e_j>
    return 0.5 * (M + M.T)


def tangential_h(S: SubmanifoldPoint) -> np.ndarray:
    return tangential_h_of(S.ambient, S.tangent_frame)


def tangential_phih(S: SubmanifoldPoint) -> np.ndarray:
    return tangential_phih_of(S.ambient, S.tangent_frame)


def mean_curvature(S: SubmanifoldPoint) -> tuple[np.ndarray, float]:
    """Mean curvature components in the normal frame and ||H||^2."""
    H = np.trace(S.sigma, axis1=1, axis2=2) / S.n
    return H, float(H @ H)


def sigma_norm_sq(S: SubmanifoldPoint) -> float:
    return float(np.sum(S.sigma**2))


def induced_curvature(S: SubmanifoldPoint, X, Y, Z, W) -> float:
    """Gauss equation evaluated vector by vector; arguments are ambient vectors."""
    from .ambient import ambient_curvature

    x, y, z, w = (S.to_tangent(v) for v in (X, Y, Z, W))
    sig = lambda a, b: np.einsum("rij,i,j->r", S.sigma, a, b)  # noqa: E731
    return (
        ambient_curvature(S.ambient, X, Y, Z, W)
        + sig(x, w) @ sig(y, z)
        - sig(x, z) @ sig(y, w)
    )


def relative_null_space(S: SubmanifoldPoint) -> Subspace | None:
    """Kernel of X -> (A_r X)_r, in tangent-frame coordinates.

    Returns None when the kernel is trivial.
    """
    stacked = S.sigma.reshape(-1, S.n)
    _, sv, vt = np.linalg.svd(stacked)
    sv = np.concatenate([sv, np.zeros(S.n - len(sv))])
    null = vt[sv <= NULL_TOL]
    if len(null) == 0:
        return None
    return Subspace(null)


def rotate_normals_to_mean(S: SubmanifoldPoint, first: np.ndarray | None = None) -> np.ndarray:
    """Shape operators after an orthogonal change of normal frame.

    The new first normal is H/||H|| (or ``first``, given in normal-frame
    coordinates); the remaining normals complete it.  Returns the rotated
    sigma array, shape (codim, n, n).
    """
    if first is None:
        H, _ = mean_curvature(S)
        first = H
    first = np.asarray(first, dtype=float)
    norm = np.linalg.norm(first)
    if norm <= ORTHO_TOL:
        return S.sigma.copy()
    u = first / norm
    basis = np.vstack([u, orthonormal_complement(u[None], S.codim)])
    return np.einsum("qr,rij->qij", basis, S.sigma)
