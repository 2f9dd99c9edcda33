"""Intrinsic curvature invariants of a submanifold point.

Subspaces and vectors passed to this module are expressed in tangent-frame
coordinates (R^n).  Extrema over Grassmannians are found by sampling plus
multistart local descent.  They carry one-sided semantics: a reported
infimum is an upper bound on the true infimum (``certified =
"sampled-upper-bound-on-inf"``) unless the instance admits a closed form
(``"exact-analytic"``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import _kernels
from .errors import BadDimension, BadK, TupleNotInS, VectorNotInSubspace
from .linalg import Subspace, orthonormal_complement, random_orthogonal_batch
from .submanifold import SubmanifoldPoint

SAMPLED = "sampled-upper-bound-on-inf"
SAMPLED_SUP = "sampled-lower-bound-on-sup"
EXACT = "exact-analytic"
SAMPLE_BLOCK = 1024
CONSTANT_TOL = 1e-11


@dataclass(frozen=True)
class SearchBudget:
    samples: int = 4096
    multistarts: int = 16
    step_tol: float = 1e-10
    max_iters: int = 200
    seed: int = 0

    def __post_init__(self):
        if min(self.samples, self.multistarts, self.max_iters) <= 0 or self.step_tol <= 0:
            raise ValueError("search budget fields must be positive")


@dataclass(frozen=True)
class TupleSpec:
    """Unordered tuple (n_1, ..., n_k), stored in non-increasing order."""

    dims: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(sorted((int(d) for d in self.dims), reverse=True)))

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    def admissible(self, n: int) -> bool:
        return all(d >= 2 for d in self.dims) and all(d < n for d in self.dims) and self.total <= n

    def require(self, n: int) -> None:
        if not self.admissible(n):
            raise TupleNotInS(f"{self.dims} is not an admissible tuple for n={n}")

    def __str__(self):
        return "(" + ",".join(map(str, self.dims)) + ")"


@dataclass
class ExtremumResult:
    value: float
    witness: Any
    certified: str
    extra: dict = field(default_factory=dict)

    def witness_dict(self) -> dict:
        w = self.witness
        if isinstance(w, Subspace):
            return {"subspace": w.to_list()}
        if isinstance(w, tuple) and len(w) == 2 and isinstance(w[0], Subspace) and not isinstance(w[1], Subspace):
            return {"subspace": w[0].to_list(), "vector": np.asarray(w[1]).tolist()}
        if isinstance(w, tuple):
            return {"tuple": [s.to_list() for s in w]}
        return {}


# ----------------------------------------------------------------------------
# pointwise quantities


def _check_subspace(S: SubmanifoldPoint, L: Subspace, dim: int | None = None) -> None:
    if L.ambient_dim != S.n:
        raise BadDimension(f"subspace lives in R^{L.ambient_dim}, tangent space is R^{S.n}")
    if dim is not None and L.dim != dim:
        raise BadDimension(f"expected a {dim}-dimensional subspace, got {L.dim}")


def _sectional(R: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    return float(np.einsum("ijkl,i,j,k,l->", R, u, v, v, u))


def sectional_curvature(S: SubmanifoldPoint, pi: Subspace) -> float:
    _check_subspace(S, pi, 2)
    u, v = pi.basis
    return _sectional(S.curvature, u, v)


def scalar_curvature(S: SubmanifoldPoint) -> float:
    R = S.curvature
    n = S.n
    return float(sum(R[i, j, j, i] for i in range(n) for j in range(i + 1, n)))


def subspace_scalar_curvature(S: SubmanifoldPoint, L: Subspace) -> float:
    _check_subspace(S, L)
    if L.dim < 2:
        raise BadDimension("scalar curvature needs a subspace of dimension >= 2")
    K = _kernels.frame_sectional(S.curvature, L.basis[None])[0]
    return float(np.sum(np.triu(K, 1)))


def k_ricci(S: SubmanifoldPoint, P: Subspace, U) -> float:
    """Sum of K(U, e_j) over an orthonormal completion {U, e_2..e_k} of P."""
    _check_subspace(S, P)
    U = np.asarray(U, dtype=float)
    if abs(np.linalg.norm(U) - 1.0) > 1e-10:
        raise VectorNotInSubspace("U must be a unit vector")
    frame = P.completion_from(U)
    return float(sum(_sectional(S.curvature, frame[0], e) for e in frame[1:]))


def ricci_tensor(S: SubmanifoldPoint) -> np.ndarray:
    """S_ij = sum_k R(e_i, e_k, e_k, e_j)."""
    Ric = np.einsum("ikkj->ij", S.curvature)
    return 0.5 * (Ric + Ric.T)


def constant_curvature(S: SubmanifoldPoint) -> float | None:
    """Return c when R = c (g g - g g) within tolerance, else None."""
    n = S.n
    R = S.curvature
    c = float(R[0, 1, 1, 0])
    eye = np.eye(n)
    model = c * (np.einsum("il,jk->ijkl", eye, eye) - np.einsum("ik,jl->ijkl", eye, eye))
    if np.max(np.abs(R - model)) <= CONSTANT_TOL * max(1.0, abs(c)):
        return c
    return None


# ----------------------------------------------------------------------------
# sampling helpers


def _blocks(seed: int, tag: int, count: int, make):
    """Concatenate ``count`` samples drawn in fixed-size seeded blocks.

    Block b always uses the generator seeded by (seed, tag, b), so a larger
    count extends a smaller one without changing its prefix.
    """
    out = []
    nblocks = math.ceil(count / SAMPLE_BLOCK)
    for b in range(nblocks):
        rng = np.random.default_rng([seed, tag, b])
        out.append(make(rng, SAMPLE_BLOCK))
    if not out:
        return None
    return np.concatenate(out)[:count]


def random_planes(seed: int, count: int, n: int, tag: int = 1):
    def make(rng, size):
        z = rng.standard_normal((size, 2, n))
        u = z[:, 0] / np.linalg.norm(z[:, 0], axis=1, keepdims=True)
        v = z[:, 1] - np.sum(u * z[:, 1], axis=1, keepdims=True) * u
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return np.stack([u, v], axis=1)

    return _blocks(seed, tag, count, make)


def random_frames(seed: int, count: int, n: int, tag: int = 2):
    return _blocks(seed, tag, count, lambda rng, size: random_orthogonal_batch(rng, size, n))


def random_units(seed: int, count: int, n: int, tag: int = 3):
    def make(rng, size):
        z = rng.standard_normal((size, n))
        return z / np.linalg.norm(z, axis=1, keepdims=True)

    return _blocks(seed, tag, count, make)


def coordinate_planes(n: int) -> np.ndarray:
    eye = np.eye(n)
    return np.array([[eye[i], eye[j]] for i in range(n) for j in range(i + 1, n)])


# ----------------------------------------------------------------------------
# sectional curvature extrema


def _descend_plane(R, u, v, budget: SearchBudget):
    """Alternating eigen-steps: fix one vector, choose the best partner."""
    n = R.shape[0]
    val = _sectional(R, u, v)
    for _ in range(budget.max_iters):
        improved = False
        for _swap in range(2):
            M = np.einsum("ijkl,i,l->jk", R, u, u)
            B = orthonormal_complement(u[None], n)
            w, V = np.linalg.eigh(B @ (0.5 * (M + M.T)) @ B.T)
            cand = B.T @ V[:, 0]
            new = float(w[0])
            if new < val - budget.step_tol:
                improved = True
            if new <= val:
                v, val = cand / np.linalg.norm(cand), new
            u, v = v, u
        if not improved:
            break
    return u, v, _sectional(R, u, v)


def _plane_extremum(S: SubmanifoldPoint, budget: SearchBudget, sign: float) -> ExtremumResult:
    n = S.n
    R = sign * S.curvature
    c = constant_curvature(S)
    if n == 2 or c is not None:
        e = np.eye(n)[:2]
        return ExtremumResult(sign * _sectional(R, e[0], e[1]), Subspace(e), EXACT)
    coord = coordinate_planes(n)
    samples = random_planes(budget.seed, budget.samples, n)
    Kc = _kernels.sectional_batch(R, coord[:, 0], coord[:, 1])
    Ks = _kernels.sectional_batch(R, samples[:, 0], samples[:, 1])
    best_c = int(np.argmin(Kc))
    planes = np.concatenate([coord, samples])
    values = np.concatenate([Kc, Ks])
    starts = [coord[best_c]] + list(samples[: budget.multistarts])
    best = int(np.argmin(values))
    best_val, best_plane = float(values[best]), planes[best]
    for p in starts:
        u, v, val = _descend_plane(R, p[0].copy(), p[1].copy(), budget)
        if val < best_val:
            best_val, best_plane = val, np.array([u, v])
    pi = Subspace(np.linalg.qr(best_plane.T)[0].T)
    return ExtremumResult(sign * best_val, pi, SAMPLED if sign > 0 else SAMPLED_SUP,
                          {"coordinate_best": float(sign * Kc[best_c])})


def inf_sectional(S: SubmanifoldPoint, budget: SearchBudget = SearchBudget()) -> ExtremumResult:
    return _plane_extremum(S, budget, 1.0)


def sup_sectional(S: SubmanifoldPoint, budget: SearchBudget = SearchBudget()) -> ExtremumResult:
    return _plane_extremum(S, budget, -1.0)


def chen_first_invariant(S: SubmanifoldPoint, budget: SearchBudget = SearchBudget()) -> ExtremumResult:
    """tau - inf K; a sampled inf K makes this a lower bound on the true value."""
    r = inf_sectional(S, budget)
    return ExtremumResult(scalar_curvature(S) - r.value, r.witness, r.certified, r.extra)


# ----------------------------------------------------------------------------
# delta invariants


def enumerate_tuples(n: int) -> list[TupleSpec]:
    out = [TupleSpec(())]

    def grow(prefix: tuple, largest: int, remaining: int):
        for d in range(min(largest, remaining), 1, -1):
            t = prefix + (d,)
            if d < n:
                out.append(TupleSpec(t))
                grow(t, d, remaining - d)

    grow((), n, n)
    return sorted(set(out), key=lambda t: (t.k, tuple(reversed(t.dims)), t.dims))


def constants_c_b(n: int, t: TupleSpec) -> tuple[float, float]:
    t.require(n)
    k, s = t.k, t.total
    c = n * n * (n + k - 1 - s) / (2 * (n + k - s))
    b = n * (n - 1) / 2 - sum(d * (d - 1) for d in t.dims) / 2
    return c, b


def block_mask(t: TupleSpec) -> np.ndarray:
    """Upper-triangular indicator of frame pairs lying in the same block."""
    mask = np.zeros((t.total, t.total))
    start = 0
    for d in t.dims:
        mask[start:start + d, start:start + d] = np.triu(np.ones((d, d)), 1)
        start += d
    return mask


def coordinate_tuples(n: int, t: TupleSpec) -> np.ndarray:
    """Frames (rows = coordinate vectors) whose leading blocks realize every coordinate tuple."""
    frames = []

    def assign(remaining: tuple, blocks: list, dims: tuple):
        if not dims:
            order = [i for blk in blocks for i in blk] + list(remaining)
            frames.append(np.eye(n)[order])
            return
        for blk in itertools.combinations(remaining, dims[0]):
            rest = tuple(i for i in remaining if i not in blk)
            assign(rest, blocks + [blk], dims[1:])

    assign(tuple(range(n)), [], t.dims)
    return np.array(frames)


def tuple_sums(R: np.ndarray, frames: np.ndarray, t: TupleSpec) -> np.ndarray:
    """sum_j tau(L_j) for each frame, with L_j spanned by consecutive row blocks."""
    if t.k == 0:
        return np.zeros(len(frames))
    K = _kernels.frame_sectional(R, frames[:, : t.total, :])
    return np.einsum("sab,ab->s", K, block_mask(t))


def _group_ids(n: int, t: TupleSpec) -> np.ndarray:
    ids = np.full(n, t.k)
    start = 0
    for j, d in enumerate(t.dims):
        ids[start:start + d] = j
        start += d
    return ids


def _refine_tuple(R, Q, t: TupleSpec, budget: SearchBudget, sign: float):
    """Pattern search over Givens rotations mixing rows of different blocks."""
    n = R.shape[0]
    ids = _group_ids(n, t)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if ids[a] != ids[b] and min(ids[a], ids[b]) < t.k]
    if not pairs:
        return Q, sign * float(tuple_sums(R, Q[None], t)[0])
    val = sign * float(tuple_sums(R, Q[None], t)[0])
    step = 0.5
    for _ in range(budget.max_iters):
        cands = []
        for a, b in pairs:
            for ang in (step, -step):
                c, s = math.cos(ang), math.sin(ang)
                Qn = Q.copy()
                Qn[a], Qn[b] = c * Q[a] + s * Q[b], -s * Q[a] + c * Q[b]
                cands.append(Qn)
        cands = np.array(cands)
        vals = sign * tuple_sums(R, cands, t)
        j = int(np.argmin(vals))
        if vals[j] < val:
            Q, val = cands[j], float(vals[j])
        else:
            step *= 0.5
            if step < budget.step_tol:
                break
    return Q, val


def _tuple_witness(Q: np.ndarray, t: TupleSpec) -> tuple:
    out, start = [], 0
    for d in t.dims:
        out.append(Subspace(np.linalg.qr(Q[start:start + d].T)[0].T))
        start += d
    return tuple(out)


def delta_pair(S: SubmanifoldPoint, t: TupleSpec, budget: SearchBudget = SearchBudget()):
    """(delta, tilde_delta) computed from one shared candidate list.

    The candidates are every coordinate tuple plus ``budget.samples`` random
    orthogonal frames; the best coordinate tuple and the first
    ``budget.multistarts`` samples are then refined (separately for the
    infimum and the supremum).
    """
    n = S.n
    t.require(n)
    tau = scalar_curvature(S)
    if t.k == 0:
        return (ExtremumResult(tau, (), EXACT), ExtremumResult(tau, (), EXACT))
    R = S.curvature
    coord = coordinate_tuples(n, t)
    samples = random_frames(budget.seed, budget.samples, n)
    frames = np.concatenate([coord, samples])
    sums = tuple_sums(R, frames, t)
    nc = len(coord)
    c = constant_curvature(S)
    results = []
    for sign in (1.0, -1.0):
        vals = sign * sums
        best = int(np.argmin(vals))
        best_val, best_Q = float(vals[best]), frames[best]
        if c is None:
            starts = [frames[int(np.argmin(vals[:nc]))]] + list(samples[: budget.multistarts])
            for Q0 in starts:
                Q, val = _refine_tuple(R, Q0.copy(), t, budget, sign)
                if val < best_val:
                    best_val, best_Q = val, Q
        certified = EXACT if c is not None else (SAMPLED if sign > 0 else SAMPLED_SUP)
        extra = {
            "sum_tau": sign * best_val,
            "coordinate_best": float(sign * np.min(vals[:nc])),
            "candidates": int(len(frames)),
        }
        results.append(ExtremumResult(tau - sign * best_val, _tuple_witness(best_Q, t), certified, extra))
    return results[0], results[1]


def delta_invariant(S: SubmanifoldPoint, t: TupleSpec, budget: SearchBudget = SearchBudget()) -> ExtremumResult:
    return delta_pair(S, t, budget)[0]


def tilde_delta(S: SubmanifoldPoint, t: TupleSpec, budget: SearchBudget = SearchBudget()) -> ExtremumResult:
    return delta_pair(S, t, budget)[1]


def s_space_check(S: SubmanifoldPoint, t: TupleSpec, budget: SearchBudget = SearchBudget(), tol: float = 1e-6) -> bool:
    d, dt = delta_pair(S, t, budget)
    return bool(abs(d.value - dt.value) <= tol)


# ----------------------------------------------------------------------------
# theta_k


def _partner_forms(R: np.ndarray, X: np.ndarray) -> np.ndarray:
    """M_X[j, k] = R(X, e_j, e_k, X) for each row X, shifted so X itself is never chosen."""
    M = np.einsum("ijkl,si,sl->sjk", R, X, X)
    M = 0.5 * (M + M.transpose(0, 2, 1))
    bound = np.max(np.sum(np.abs(M), axis=2), axis=1)
    shift = 2.0 * bound + 1.0
    return M + shift[:, None, None] * np.einsum("sj,sk->sjk", X, X)


def _best_ricci_plane(R, X, k):
    w, V = np.linalg.eigh(_partner_forms(R, X))
    return np.sum(w[:, : k - 1], axis=1), V[:, :, : k - 1]


def _descend_theta(R, x, k, budget):
    val, V = _best_ricci_plane(R, x[None], k)
    val = float(val[0])
    P = np.vstack([x, V[0].T])
    for _ in range(budget.max_iters):
        RicP = np.einsum("ijkl,bj,bk->il", R, P, P)
        Rp = P @ (0.5 * (RicP + RicP.T)) @ P.T
        w, U = np.linalg.eigh(Rp)
        x_new = U[:, 0] @ P
        x_new /= np.linalg.norm(x_new)
        v2, V2 = _best_ricci_plane(R, x_new[None], k)
        if float(v2[0]) < val - budget.step_tol:
            val, x = float(v2[0]), x_new
            P = np.vstack([x, V2[0].T])
        else:
            break
    return x, P, val


def theta_k(S: SubmanifoldPoint, k: int, budget: SearchBudget = SearchBudget()) -> ExtremumResult:
    """(1/(k-1)) inf over k-planes P and unit X in P of Ric_P(X)."""
    n = S.n
    if not 2 <= k <= n:
        raise BadK(f"k must satisfy 2 <= k <= {n}, got {k}")
    R = S.curvature
    c = constant_curvature(S)
    if c is not None:
        e = np.eye(n)
        return ExtremumResult(c, (Subspace(e[:k]), e[0]), EXACT)
    if k == 2:
        # Ric_P(X) for a 2-plane P is just K(P)
        r = inf_sectional(S, budget)
        return ExtremumResult(r.value, (r.witness, r.witness.basis[0]), r.certified, r.extra)
    if k == n:
        w, V = np.linalg.eigh(ricci_tensor(S))
        return ExtremumResult(float(w[0]) / (n - 1), (Subspace(np.eye(n)), V[:, 0]), EXACT)
    coord = np.eye(n)
    samples = random_units(budget.seed, budget.samples, n)
    X = np.concatenate([coord, samples])
    vals, _ = _best_ricci_plane(R, X, k)
    best = int(np.argmin(vals))
    best_val, best_x = float(vals[best]), X[best]
    starts = [coord[int(np.argmin(vals[:n]))]] + list(samples[: budget.multistarts])
    best_P = None
    for x0 in starts:
        x, P, val = _descend_theta(R, x0, k, budget)
        if val < best_val:
            best_val, best_x, best_P = val, x, P
    if best_P is None:
        _, V = _best_ricci_plane(R, best_x[None], k)
        best_P = np.vstack([best_x, V[0].T])
    witness = (Subspace(np.linalg.qr(best_P.T)[0].T), best_x)
    return ExtremumResult(best_val / (k - 1), witness, SAMPLED)
