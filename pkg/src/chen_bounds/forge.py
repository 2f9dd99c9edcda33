"""Seeded instance generators and brute-force oracles.

Generators build ambient points and C-totally real submanifold points of
several families: random second fundamental form, totally geodesic, totally
umbilical, and the two shape-operator forms that realize equality in the
Chen-type bounds.  The oracle recomputes invariants by exhaustive or dense
sampled evaluation, never touching the search code in ``invariants``.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special
from scipy.stats import qmc

from .ambient import (
    AmbientPoint,
    FCoefficients,
    canonical_phi,
    kappa_mu_coefficients,
    non_sasakian_divided_coefficients,
)
from .errors import (
    BadSpec,
    DimensionTooLarge,
    IncompatibleXiConstraint,
    TooLarge,
    TraceMismatch,
)
from .invariants import TupleSpec, coordinate_tuples, enumerate_tuples
from .linalg import MAX_DIM, random_orthogonal_batch
from .submanifold import (
    SubmanifoldPoint,
    build_submanifold,
    induced_curvature,
    normal_completion,
    tangential_phih_of,
)

FAMILIES = ("random", "geodesic", "umbilical", "equality_basic", "equality_delta")
F_SOURCES = ("random", "explicit", "kappa_mu", "non_sasakian")


@dataclass(frozen=True)
class GeneratorSpec:
    m: int = 3
    n: int = 3
    mode: str = "general"  # "general" | "sasakian"
    family: str = "random"
    f_source: str = "random"
    f: tuple | None = None
    c: float = 1.0
    kappa: float = 0.5
    mu: float = 0.0
    h_eigenvalues: tuple | None = None
    sigma_scale: float = 1.0
    lam: float = 1.0
    frame: str = "adapted"  # "adapted" | "rotated"
    conjugate: bool = False
    tie_f2: bool = True
    tuple_dims: tuple = (2,)
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in ("general", "sasakian"):
            raise BadSpec(f"mode must be general or sasakian, got {self.mode!r}")
        if self.family not in FAMILIES:
            raise BadSpec(f"family must be one of {FAMILIES}")
        if self.f_source not in F_SOURCES:
            raise BadSpec(f"f_source must be one of {F_SOURCES}")
        if self.frame not in ("adapted", "rotated"):
            raise BadSpec("frame must be adapted or rotated")
        if self.m < 1 or 2 * self.m + 1 > MAX_DIM:
            raise BadSpec(f"m={self.m} outside 1..{(MAX_DIM - 1) // 2}")
        if not 2 <= self.n <= self.m:
            raise BadSpec(
                f"need 2 <= n <= m: a C-totally real n-plane and its phi-image are orthogonal "
                f"inside the 2m-dimensional contact distribution (got n={self.n}, m={self.m})"
            )
        if self.sigma_scale < 0:
            raise BadSpec("sigma_scale must be non-negative")
        if self.mode == "sasakian" and self.f_source == "non_sasakian":
            raise BadSpec("non-Sasakian coefficients cannot be used in sasakian mode")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("f", "h_eigenvalues", "tuple_dims"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        d = dict(d)
        for key in ("f", "h_eigenvalues", "tuple_dims"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream])


def make_ambient(spec: GeneratorSpec) -> AmbientPoint:
    spec.validate()
    rng = _rng(spec.seed, 0)
    m = spec.m
    if spec.f_source == "random":
        f = list(rng.uniform(-1.0, 1.0, 7))
    elif spec.f_source == "explicit":
        if spec.f is None or len(spec.f) != 7:
            raise BadSpec("explicit f_source needs seven coefficients")
        f = list(spec.f)
    elif spec.f_source == "kappa_mu":
        kappa = 1.0 if spec.mode == "sasakian" else spec.kappa
        f = list(kappa_mu_coefficients(spec.c, kappa, spec.mu).as_tuple())
    else:
        f = list(non_sasakian_divided_coefficients(spec.kappa, spec.mu).as_tuple())

    if spec.mode == "sasakian":
        f[2] = f[0] - 1.0
        if spec.tie_f2:
            f[1] = f[0] - 1.0
        lam = np.zeros(m)
    elif spec.h_eigenvalues is not None:
        lam = np.asarray(spec.h_eigenvalues, dtype=float)
        if lam.shape != (m,):
            raise BadSpec(f"need {m} h eigenvalues")
    else:
        lam = rng.uniform(-1.0, 1.0, m)
    A = AmbientPoint.canonical(m, FCoefficients(*f), lam)
    if spec.conjugate:
        O = np.eye(2 * m + 1)
        O[: 2 * m, : 2 * m] = random_orthogonal_batch(rng, 1, 2 * m)[0]
        A = A.conjugated(O)
    return A


def _is_canonical(A: AmbientPoint) -> bool:
    return bool(
        np.array_equal(A.phi, canonical_phi(A.m)) and np.array_equal(A.h, np.diag(np.diag(A.h)))
    )


def _sign_fix(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v)))
    return v if v[j] >= 0 else -v


def adapted_frame(A: AmbientPoint, n: int) -> np.ndarray:
    """n orthonormal Legendrian vectors X_i with h X_i = l_i X_i.

    For the canonical structure these are the first n basis vectors.
    Otherwise h is diagonalized on the contact distribution: eigenvectors for
    positive eigenvalues come first, then a Legendrian half of the kernel of h.
    """
    if n > A.m:
        raise DimensionTooLarge(f"n={n} exceeds m={A.m}")
    if _is_canonical(A):
        return np.eye(A.dim)[:n]
    m2 = 2 * A.m
    w, V = np.linalg.eigh(A.h[:m2, :m2])
    tol = 1e-9 * max(1.0, float(np.max(np.abs(w))))
    pos = [i for i in np.argsort(-w) if w[i] > tol]
    X = [_sign_fix(V[:, i]) for i in pos]
    zero = V[:, np.abs(w) <= tol]
    phi = A.phi[:m2, :m2]
    while len(X) < A.m and zero.shape[1]:
        span = [x for x in X] + [phi @ x for x in X]
        resid = zero.copy()
        for _ in range(2):
            for q in span:
                resid -= np.outer(q, q @ resid)
        norms = np.linalg.norm(resid, axis=0)
        j = int(np.argmax(norms))
        if norms[j] < 1e-6:
            break
        X.append(_sign_fix(resid[:, j] / norms[j]))
    if len(X) < n:
        raise BadSpec("could not build an adapted Legendrian frame")
    out = np.zeros((n, A.dim))
    out[:, :m2] = np.array(X[:n])
    return out


def _tangent_frame(A: AmbientPoint, n: int, frame: str, rng: np.random.Generator) -> np.ndarray:
    E = adapted_frame(A, n)
    if frame == "adapted":
        return E
    theta = rng.uniform(0.0, 2 * np.pi, n)
    phiE = E @ A.phi.T
    E = np.cos(theta)[:, None] * E + np.sin(theta)[:, None] * phiE
    Q = random_orthogonal_batch(rng, 1, n)[0]
    return Q @ E


def _finish(A: AmbientPoint, E: np.ndarray, sigma_free: np.ndarray) -> SubmanifoldPoint:
    return build_submanifold(A, E, normal_completion(A, E), sigma_free)


def make_random_submanifold(A: AmbientPoint, n: int, sigma_scale: float = 1.0, seed: int = 0,
                            frame: str = "adapted") -> SubmanifoldPoint:
    if n > A.m:
        raise DimensionTooLarge(f"n={n} exceeds m={A.m}: no C-totally real {n}-plane exists")
    rng = _rng(seed, 1)
    E = _tangent_frame(A, n, frame, rng)
    B = rng.uniform(-sigma_scale, sigma_scale, (A.dim - n - 1, n, n))
    return _finish(A, E, 0.5 * (B + B.transpose(0, 2, 1)))


def _require_xi_free(A: AmbientPoint, E: np.ndarray, what: str) -> None:
    res = float(np.max(np.abs(tangential_phih_of(A, E))))
    if res > 1e-12:
        raise IncompatibleXiConstraint(f"{what} needs A_xi = (phi h)^T = 0, got max entry {res:.3e}")


def make_totally_umbilical(A: AmbientPoint, n: int, lam: float, normal_index: int = 0,
                           frame: str = "adapted", seed: int = 0) -> SubmanifoldPoint:
    """sigma(X, Y) = <X, Y> lam e_{n+1+normal_index}."""
    if n > A.m:
        raise DimensionTooLarge(f"n={n} exceeds m={A.m}")
    E = _tangent_frame(A, n, frame, _rng(seed, 2))
    codim = A.dim - n
    if not 0 <= normal_index < codim:
        raise BadSpec(f"normal_index must be in 0..{codim - 1}")
    if normal_index == codim - 1 and lam != 0:
        raise IncompatibleXiConstraint("the xi shape operator is fixed to (phi h)^T")
    _require_xi_free(A, E, "total umbilicity")
    free = np.zeros((codim - 1, n, n))
    if normal_index < codim - 1:
        free[normal_index] = lam * np.eye(n)
    return _finish(A, E, free)


def make_totally_geodesic(A: AmbientPoint, n: int, frame: str = "adapted", seed: int = 0) -> SubmanifoldPoint:
    return make_totally_umbilical(A, n, 0.0, 0, frame, seed)


def make_equality_basic(A: AmbientPoint, n: int, a: float, b: float, c_list=None, d_list=None) -> SubmanifoldPoint:
    """Shape operators A_{n+1} = diag(a, b, (a+b) I) and trace-free 2x2 blocks elsewhere."""
    if n > A.m:
        raise DimensionTooLarge(f"n={n} exceeds m={A.m}")
    if n < 3:
        raise BadSpec("the equality form needs n >= 3")
    E = adapted_frame(A, n)
    _require_xi_free(A, E, "the equality form")
    codim = A.dim - n
    extra = codim - 2
    c_list = np.zeros(extra) if c_list is None else np.asarray(c_list, dtype=float)
    d_list = np.zeros(extra) if d_list is None else np.asarray(d_list, dtype=float)
    if c_list.shape != (extra,) or d_list.shape != (extra,):
        raise BadSpec(f"c_list and d_list need {extra} entries each")
    free = np.zeros((codim - 1, n, n))
    free[0] = np.diag([a, b] + [a + b] * (n - 2))
    for r in range(extra):
        free[1 + r, :2, :2] = [[c_list[r], d_list[r]], [d_list[r], -c_list[r]]]
    return _finish(A, E, free)


def make_equality_delta(A: AmbientPoint, n: int, t: TupleSpec, block_specs) -> SubmanifoldPoint:
    """Block-diagonal shape operators diag(A_1, ..., A_k, a I) with tr A_j = a.

    ``block_specs[r]`` lists the k symmetric blocks for the r-th non-xi
    normal; missing normals get zero shape operators.
    """
    t.require(n)
    if n > A.m:
        raise DimensionTooLarge(f"n={n} exceeds m={A.m}")
    E = adapted_frame(A, n)
    _require_xi_free(A, E, "the delta equality form")
    codim = A.dim - n
    if len(block_specs) > codim - 1:
        raise BadSpec(f"at most {codim - 1} non-xi normals available")
    free = np.zeros((codim - 1, n, n))
    for r, blocks in enumerate(block_specs):
        if len(blocks) != t.k:
            raise BadSpec(f"normal {r}: expected {t.k} blocks")
        blocks = [np.asarray(B, dtype=float) for B in blocks]
        traces = [float(np.trace(B)) for B in blocks]
        a = traces[0] if traces else 0.0
        if traces and max(abs(tr - a) for tr in traces) > 1e-12 * max(1.0, abs(a)):
            raise TraceMismatch(f"normal {r}: block traces {traces} differ")
        start = 0
        for d, B in zip(t.dims, blocks):
            if B.shape != (d, d):
                raise BadSpec(f"normal {r}: block shape {B.shape} != {(d, d)}")
            free[r, start:start + d, start:start + d] = B
            start += d
        free[r, start:, start:] = a * np.eye(n - start)
    return _finish(A, E, free)


def random_delta_blocks(rng: np.random.Generator, t: TupleSpec, count: int, scale: float = 1.0) -> list:
    """Random symmetric blocks with a common trace per normal."""
    specs = []
    for _ in range(count):
        a = rng.uniform(-scale, scale)
        blocks = []
        for d in t.dims:
            B = rng.uniform(-scale, scale, (d, d))
            B = 0.5 * (B + B.T)
            B += (a - np.trace(B)) / d * np.eye(d)
            B = 0.5 * (B + B.T)
            blocks.append(B)
        specs.append(blocks)
    return specs


def make_instance(spec: GeneratorSpec) -> SubmanifoldPoint:
    """Build one instance of ``spec.family``."""
    A = make_ambient(spec)
    n = spec.n
    rng = _rng(spec.seed, 3)
    if spec.family == "random":
        return make_random_submanifold(A, n, spec.sigma_scale, spec.seed, spec.frame)
    if spec.family == "geodesic":
        return make_totally_geodesic(A, n, spec.frame, spec.seed)
    if spec.family == "umbilical":
        return make_totally_umbilical(A, n, spec.lam, 0, spec.frame, spec.seed)
    codim = A.dim - n
    s = spec.sigma_scale
    if spec.family == "equality_basic":
        if n < 3:
            raise BadSpec("equality_basic needs n >= 3")
        a, b = rng.uniform(-s, s, 2)
        return make_equality_basic(A, n, a, b, rng.uniform(-s, s, codim - 2), rng.uniform(-s, s, codim - 2))
    t = TupleSpec(spec.tuple_dims)
    if not t.admissible(n):
        raise BadSpec(f"tuple {t} not admissible for n={n}")
    return make_equality_delta(A, n, t, random_delta_blocks(rng, t, codim - 1, s))


# ----------------------------------------------------------------------------
# oracle


def _oracle_tensor(S: SubmanifoldPoint) -> np.ndarray:
    """Induced curvature on all frame quadruples, one Gauss-equation call each."""
    n = S.n
    E = S.tangent_frame
    R = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    R[i, j, k, l] = induced_curvature(S, E[i], E[j], E[k], E[l])
    return R


def _oracle_frame_K(Rm: np.ndarray, n: int, Q: np.ndarray) -> np.ndarray:
    x = np.einsum("sai,sal->sail", Q, Q).reshape(len(Q), Q.shape[1], n * n)
    return np.einsum("sap,pq,sbq->sab", x, Rm, x)


def _sobol_pairs(n: int, count: int, seed: int, chunk: int = 1 << 16):
    """Scrambled Sobol points pushed through the normal quantile, as (size, 2, n) chunks."""
    sobol = qmc.Sobol(2 * n, scramble=True, seed=np.random.default_rng([seed, 99]))
    done = 0
    while done < count:
        size = min(chunk, count - done)
        with warnings.catch_warnings():
            # prefixes that are not powers of two lose some balance; fine for a sweep
            warnings.simplefilter("ignore", UserWarning)
            pts = sobol.random(size)
        pts = np.clip(pts, 1e-15, 1 - 1e-15)
        yield special.ndtri(pts).reshape(size, 2, n)
        done += size


def oracle_invariants(S: SubmanifoldPoint, density: int = 100_000, seed: int = 0,
                      frame_density: int | None = None) -> dict:
    """Independent recomputation of tau, inf K, delta/tilde-delta and theta_k.

    tau is a double loop over Gauss-equation sectional curvatures.  inf K is
    the minimum over ``density`` quasi-random (scrambled Sobol) planes; the
    tuple and k-Ricci quantities come from ``frame_density`` random
    orthogonal frames (plus every coordinate tuple).  Nothing is refined.
    """
    n = S.n
    if n > 5:
        raise TooLarge("the oracle enumerates tuples only up to n = 5")
    E = S.tangent_frame
    tau = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            tau += float(induced_curvature(S, E[i], E[j], E[j], E[i]))
    R = _oracle_tensor(S)
    Rm = R.transpose(0, 3, 1, 2).reshape(n * n, n * n)

    inf_k = np.inf
    for z in _sobol_pairs(n, density, seed):
        u = z[:, 0] / np.linalg.norm(z[:, 0], axis=1, keepdims=True)
        v = z[:, 1] - np.sum(u * z[:, 1], axis=1, keepdims=True) * u
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        x = (u[:, :, None] * u[:, None, :]).reshape(len(z), n * n)
        y = (v[:, :, None] * v[:, None, :]).reshape(len(z), n * n)
        inf_k = min(inf_k, float(np.min(np.sum((x @ Rm) * y, axis=1))))

    nf = frame_density if frame_density is not None else min(density, 20_000)
    frames = random_orthogonal_batch(np.random.default_rng([seed, 98]), nf, n)
    K = _oracle_frame_K(Rm, n, frames)
    delta, tilde = {}, {}
    for t in enumerate_tuples(n):
        if t.k == 0:
            delta[str(t)] = tilde[str(t)] = float(tau)
            continue
        coord = coordinate_tuples(n, t)
        Kall = np.concatenate([_oracle_frame_K(Rm, n, coord), K])
        sums = np.zeros(len(Kall))
        start = 0
        for d in t.dims:
            blk = Kall[:, start:start + d, start:start + d]
            sums += 0.5 * (np.sum(blk, axis=(1, 2)) - np.trace(blk, axis1=1, axis2=2))
            start += d
        delta[str(t)] = tau - float(np.min(sums))
        tilde[str(t)] = tau - float(np.max(sums))
    theta = {}
    for k in range(2, n + 1):
        blk = K[:, :k, :k]
        ric = np.sum(blk, axis=2) - np.diagonal(blk, axis1=1, axis2=2)
        theta[k] = float(np.min(ric)) / (k - 1)
    return {
        "tau": float(tau),
        "inf_K": inf_k,
        "delta": delta,
        "tilde_delta": tilde,
        "theta": theta,
        "density": int(density),
        "frame_density": int(nf),
    }
