"""Both sides of every curvature inequality, plus equality-form detectors.

Every check returns an :class:`InequalityReport` for ``lhs <= rhs`` with
``slack = rhs - lhs``.  Checks whose statement holds for each plane, vector
or tuple separately are evaluated at the given witness in ``"exact"`` mode.
Checks that consume a sampled infimum run in ``"conservative"`` mode and
never set pass/fail or equality flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .ambient import classify_sasakian
from .errors import (
    BadPlane,
    BadTuple,
    DimensionTooSmall,
    HypothesisViolated,
    NotSasakianMode,
    NotUnit,
)
from .invariants import (
    EXACT,
    SearchBudget,
    TupleSpec,
    constants_c_b,
    k_ricci,
    ricci_tensor,
    scalar_curvature,
    sectional_curvature,
    theta_k,
    tuple_sums,
)
from .linalg import Subspace, min_eigenvalue, orthonormal_complement
from .submanifold import (
    SubmanifoldPoint,
    mean_curvature,
    rotate_normals_to_mean,
    sigma_norm_sq,
    tangential_h,
    tangential_phih,
)

EQ_TOL = 1e-9
SLACK_TOL = 1e-8
IDENTITY_RTOL = 1e-9
FORM_TOL = 1e-7
SASAKIAN_H_TOL = 1e-12


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    mode: str = "exact"
    witness: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    eq_tol: float = EQ_TOL
    slack_tol: float = SLACK_TOL
    identity: bool = False

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def equality(self) -> bool:
        if self.mode != "exact":
            return False
        if self.identity:
            return bool(abs(self.slack) <= IDENTITY_RTOL * (1.0 + abs(self.lhs)))
        return bool(abs(self.slack) <= self.eq_tol)

    @property
    def passed(self) -> bool | None:
        """None for conservative reports; they only record values."""
        if self.mode != "exact":
            return None
        if self.identity:
            return self.equality
        return bool(self.slack >= -self.slack_tol)

    def to_dict(self) -> dict:
        tols = {"eq_tol": self.eq_tol, "slack_tol": self.slack_tol}
        if self.identity:
            tols = {"identity_rtol": IDENTITY_RTOL}
        return {
            "name": self.name,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "slack": float(self.slack),
            "equality": self.equality,
            "passed": self.passed,
            "mode": self.mode,
            "witness": self.witness,
            "tolerances": tols,
            **({"extra": self.extra} if self.extra else {}),
        }


@dataclass
class EqualityFormReport:
    name: str
    matched: bool
    residual: float
    parameters: dict = field(default_factory=dict)
    basis_found: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "matched": self.matched,
            "residual": float(self.residual),
            "parameters": self.parameters,
            "basis_found": self.basis_found,
            "tolerances": {"form_tol": FORM_TOL},
        }


# ----------------------------------------------------------------------------
# shared pieces


@dataclass(frozen=True)
class _Traces:
    n: int
    trh: float
    normh: float
    trph: float
    normph: float
    Hsq: float
    sigsq: float

    @classmethod
    def of(cls, S: SubmanifoldPoint) -> "_Traces":
        h, ph = tangential_h(S), tangential_phih(S)
        return cls(S.n, float(np.trace(h)), float(np.sum(h * h)), float(np.trace(ph)),
                   float(np.sum(ph * ph)), mean_curvature(S)[1], sigma_norm_sq(S))


def ambient_scalar_part(S: SubmanifoldPoint) -> float:
    """Twice the ambient scalar curvature of the tangent plane, in closed form."""
    f, t = S.ambient.f, _Traces.of(S)
    n = t.n
    return (
        n * (n - 1) * f.f1
        + 2 * (n - 1) * f.f4 * t.trh
        + f.f51 * (t.trh**2 - t.normh)
        - f.f52 * (t.normph - t.trph**2)
    )


def _require_n3(S: SubmanifoldPoint) -> None:
    if S.n < 3:
        raise DimensionTooSmall(f"this inequality needs n >= 3, got n={S.n}")


def is_sasakian_mode(S: SubmanifoldPoint) -> bool:
    return classify_sasakian(S.ambient.f) and float(np.max(np.abs(S.ambient.h))) <= SASAKIAN_H_TOL


def _require_sasakian(S: SubmanifoldPoint) -> None:
    if not is_sasakian_mode(S):
        raise NotSasakianMode("requires f3 = f1 - 1 and h = 0")


def _plane(S: SubmanifoldPoint, pi: Subspace) -> Subspace:
    if not isinstance(pi, Subspace):
        pi = Subspace(np.asarray(pi, dtype=float))
    if pi.dim != 2 or pi.ambient_dim != S.n:
        raise BadPlane(f"need a 2-plane in R^{S.n}, got dim {pi.dim} in R^{pi.ambient_dim}")
    return pi


# ----------------------------------------------------------------------------
# checks


def check_scalar_identity(S: SubmanifoldPoint) -> InequalityReport:
    """2 tau (summed Gauss sectional curvatures) against its closed form."""
    R = S.curvature
    n = S.n
    lhs = 2.0 * sum(R[i, j, j, i] for i in range(n) for j in range(i + 1, n))
    t = _Traces.of(S)
    rhs = ambient_scalar_part(S) + n * n * t.Hsq - t.sigsq
    return InequalityReport("scalar_identity", lhs, rhs, identity=True)


def chen_first_rhs(S: SubmanifoldPoint, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Right-hand side of the per-plane Chen bound for planes span(U[s], V[s])."""
    f, t = S.ambient.f, _Traces.of(S)
    n = t.n
    h, ph = tangential_h(S), tangential_phih(S)

    def restricted(Q):
        quu = np.einsum("si,ij,sj->s", U, Q, U)
        qvv = np.einsum("si,ij,sj->s", V, Q, V)
        quv = np.einsum("si,ij,sj->s", U, Q, V)
        return quu + qvv, quu * qvv - quv * quv

    tr_hp, det_hp = restricted(h)
    _, det_php = restricted(ph)
    return (
        n * n * (n - 2) / (2 * (n - 1)) * t.Hsq
        + (n + 1) * (n - 2) / 2 * f.f1
        + f.f4 * ((n - 1) * t.trh - tr_hp)
        + 0.5 * f.f51 * (t.trh**2 - t.normh - 2 * det_hp)
        - 0.5 * f.f52 * (t.normph - t.trph**2 + 2 * det_php)
    )


def chen_first_slacks(S: SubmanifoldPoint, planes: np.ndarray):
    """Vectorized (lhs, rhs) over planes given as an (N, 2, n) orthonormal-pair array."""
    _require_n3(S)
    U, V = planes[:, 0], planes[:, 1]
    lhs = scalar_curvature(S) - _kernels.sectional_batch(S.curvature, U, V)
    return lhs, chen_first_rhs(S, U, V)


def check_chen_fundamental(S: SubmanifoldPoint, pi) -> InequalityReport:
    _require_n3(S)
    pi = _plane(S, pi)
    lhs = scalar_curvature(S) - sectional_curvature(S, pi)
    u, v = pi.basis
    rhs = float(chen_first_rhs(S, u[None], v[None])[0])
    return InequalityReport("chen_first", lhs, rhs, witness={"plane": pi.to_list()})


def ricci_bound_rhs(S: SubmanifoldPoint, U: np.ndarray) -> np.ndarray:
    f, t = S.ambient.f, _Traces.of(S)
    n = t.n
    h, ph = tangential_h(S), tangential_phih(S)
    hU, phU = U @ h, U @ ph
    huu = np.sum(hU * U, axis=1)
    phuu = np.sum(phU * U, axis=1)
    return (
        n * n * t.Hsq / 4
        + (n - 1) * f.f1
        + f.f4 * (t.trh + (n - 2) * huu)
        + f.f51 * (t.trh * huu - np.sum(hU * hU, axis=1))
        + f.f52 * (t.trph * phuu - np.sum(phU * phU, axis=1))
    )


def ricci_bound_slacks(S: SubmanifoldPoint, U: np.ndarray):
    """Vectorized (lhs, rhs) of the Ricci bound; lhs from the Ricci tensor quadratic form."""
    _require_n3(S)
    U = np.atleast_2d(U)
    lhs = np.einsum("si,ij,sj->s", U, ricci_tensor(S), U)
    return lhs, ricci_bound_rhs(S, U)


def check_ricci_bound(S: SubmanifoldPoint, U) -> InequalityReport:
    _require_n3(S)
    U = np.asarray(U, dtype=float)
    if U.shape != (S.n,) or abs(np.linalg.norm(U) - 1.0) > 1e-10:
        raise NotUnit("U must be a unit vector in tangent coordinates")
    lhs = k_ricci(S, Subspace(np.eye(S.n)), U)
    rhs = float(ricci_bound_rhs(S, U[None])[0])
    return InequalityReport("ricci_bound", lhs, rhs, witness={"vector": U.tolist()})


def check_mean_vs_scalar(S: SubmanifoldPoint) -> InequalityReport:
    _require_n3(S)
    n = S.n
    lhs = 2 * scalar_curvature(S) - ambient_scalar_part(S)
    rhs = n * (n - 1) * mean_curvature(S)[1]
    return InequalityReport("mean_vs_scalar", lhs, rhs)


def check_theta_bound(S: SubmanifoldPoint, k: int, budget: SearchBudget = SearchBudget()) -> InequalityReport:
    """k-Ricci bound using the engine's theta_k estimate.

    The estimate can only over-shoot the true infimum, so the check is exact
    only when theta_k has a closed form; otherwise it is recorded as
    conservative.  ``extra["chain_rhs"]`` holds the exact intermediate bound
    2 tau - (ambient part) that the k-Ricci bound is derived from.
    """
    _require_n3(S)
    n = S.n
    th = theta_k(S, k, budget)
    part = ambient_scalar_part(S)
    lhs = n * (n - 1) * th.value - part
    rhs = n * (n - 1) * mean_curvature(S)[1]
    mode = "exact" if th.certified == EXACT else "conservative"
    extra = {
        "k": k,
        "theta_k": th.value,
        "theta_certified": th.certified,
        "chain_lhs": 2 * scalar_curvature(S) - part,
    }
    return InequalityReport(f"theta_bound_k{k}", lhs, rhs, mode=mode, witness=th.witness_dict(), extra=extra)


def check_sasakian_suite(S: SubmanifoldPoint, pi, U) -> list[InequalityReport]:
    """Chen first bound, Ricci bound, and Ricci-tensor PSD bound in Sasakian mode."""
    _require_sasakian(S)
    _require_n3(S)
    pi = _plane(S, pi)
    U = np.asarray(U, dtype=float)
    if U.shape != (S.n,) or abs(np.linalg.norm(U) - 1.0) > 1e-10:
        raise NotUnit("U must be a unit vector in tangent coordinates")
    n, f1 = S.n, S.ambient.f.f1
    Hsq = mean_curvature(S)[1]
    tau = scalar_curvature(S)
    first = InequalityReport(
        "sasakian_chen_first",
        tau - sectional_curvature(S, pi),
        n * n * (n - 2) / (2 * (n - 1)) * Hsq + (n + 1) * (n - 2) / 2 * f1,
        witness={"plane": pi.to_list()},
    )
    ricci = InequalityReport(
        "sasakian_ricci",
        k_ricci(S, Subspace(np.eye(n)), U),
        n * n * Hsq / 4 + (n - 1) * f1,
        witness={"vector": U.tolist()},
    )
    gap = (n * n * Hsq + 4 * (n - 1) * f1) * np.eye(n) - 4 * ricci_tensor(S)
    psd = InequalityReport("sasakian_ricci_tensor", 0.0, min_eigenvalue(gap))
    return [first, ricci, psd]


def _tuple_frame(S: SubmanifoldPoint, t: TupleSpec, L) -> np.ndarray:
    L = tuple(s if isinstance(s, Subspace) else Subspace(np.asarray(s, dtype=float)) for s in L)
    if len(L) != t.k or sorted((s.dim for s in L), reverse=True) != list(t.dims):
        raise BadTuple(f"subspace dimensions {[s.dim for s in L]} do not match {t.dims}")
    L = sorted(L, key=lambda s: -s.dim)
    if t.k == 0:
        return np.eye(S.n)
    rows = np.vstack([s.basis for s in L])
    if rows.shape[1] != S.n:
        raise BadTuple("subspaces must live in the tangent space")
    gram = rows @ rows.T
    if np.max(np.abs(gram - np.eye(len(rows)))) > 1e-10:
        raise BadTuple("subspaces are not mutually orthogonal")
    return np.vstack([rows, orthonormal_complement(rows, S.n)])


def delta_tuple_rhs(S: SubmanifoldPoint, t: TupleSpec) -> float:
    c, b = constants_c_b(S.n, t)
    return c * mean_curvature(S)[1] + b * S.ambient.f.f1


def delta_tuple_slacks(S: SubmanifoldPoint, t: TupleSpec, frames: np.ndarray):
    """Vectorized (lhs, rhs) over frames whose leading row blocks form the tuple."""
    _require_sasakian(S)
    t.require(S.n)
    lhs = scalar_curvature(S) - tuple_sums(S.curvature, frames, t)
    return lhs, np.full(len(lhs), delta_tuple_rhs(S, t))


def check_delta_tuple(S: SubmanifoldPoint, t: TupleSpec, L) -> InequalityReport:
    _require_sasakian(S)
    t.require(S.n)
    Q = _tuple_frame(S, t, L)
    lhs = float(scalar_curvature(S) - tuple_sums(S.curvature, Q[None], t)[0])
    c, b = constants_c_b(S.n, t)
    rep = InequalityReport(f"delta_tuple{t}", lhs, delta_tuple_rhs(S, t),
                           witness={"tuple": [Q[:t.total].tolist()]}, extra={"c": c, "b": b})
    return rep


# ----------------------------------------------------------------------------
# equality-form detectors


def _basic_form_residual(sig: np.ndarray, T: np.ndarray):
    """Residual of the first-inequality equality form with sig[0] along H.

    ``T`` holds a tangent basis whose first two rows span the plane.
    """
    A = T @ sig[0] @ T.T
    w, V = np.linalg.eigh(A[:2, :2])
    rot = np.eye(len(T))
    rot[:2, :2] = V.T
    T = rot @ T
    A = T @ sig[0] @ T.T
    a, b = float(A[0, 0]), float(A[1, 1])
    m = len(T) - 2
    res = max(float(np.max(np.abs(A[:2, 2:]), initial=0.0)),
              float(np.max(np.abs(A[2:, 2:] - (a + b) * np.eye(m)), initial=0.0)),
              abs(float(A[0, 1])))
    cs, ds = [], []
    for S_r in sig[1:]:
        B = T @ S_r @ T.T
        res = max(res, float(np.max(np.abs(B[:2, 2:]), initial=0.0)),
                  float(np.max(np.abs(B[2:, 2:]), initial=0.0)), abs(float(B[0, 0] + B[1, 1])))
        cs.append(float(B[0, 0]))
        ds.append(float(B[0, 1]))
    return res, {"a": a, "b": b, "c": cs, "d": ds}, T


def detect_equality_form_basic(S: SubmanifoldPoint, pi) -> EqualityFormReport:
    """Search for a frame putting the shape operators into the first-inequality equality form.

    The plane basis is rotated to diagonalize the shape operator along H.
    When H vanishes every normal frame direction is tried as that gauge.
    """
    _require_n3(S)
    pi = _plane(S, pi)
    T = np.vstack([pi.basis, orthonormal_complement(pi.basis, S.n)])
    H, _ = mean_curvature(S)
    gauges = []
    if np.linalg.norm(H) > 1e-12:
        gauges.append(H)
    gauges.extend(np.eye(S.codim))
    best = None
    for g in gauges:
        sig = rotate_normals_to_mean(S, first=g)
        res, params, Tb = _basic_form_residual(sig, T)
        if best is None or res < best[0]:
            best = (res, params, Tb, g)
    res, params, Tb, g = best
    g = g / np.linalg.norm(g)
    normal_basis = np.vstack([g, orthonormal_complement(g[None], S.codim)]) @ S.normal_frame
    return EqualityFormReport(
        "chen_first_form",
        bool(res <= FORM_TOL),
        res,
        params,
        {"tangent": Tb.tolist(), "normal": normal_basis.tolist()},
    )


def detect_equality_form_delta(S: SubmanifoldPoint, t: TupleSpec) -> EqualityFormReport:
    """Block-diagonal form diag(A_1, ..., A_k, a I) with tr A_j = a, frame-aligned blocks."""
    t.require(S.n)
    n = S.n
    ids = np.full(n, -1)
    start = 0
    for j, d in enumerate(t.dims):
        ids[start:start + d] = j
        start += d
    tail = np.arange(start, n)
    same = (ids[:, None] == ids[None, :]) & (ids[:, None] >= 0)
    same[np.ix_(tail, tail)] = True
    res = 0.0
    a_list = []
    for A in S.sigma:
        traces = [np.trace(A[ids == j][:, ids == j]) for j in range(t.k)]
        if len(tail):
            a = float(np.mean(np.diag(A)[tail]))
            res = max(res, float(np.max(np.abs(A[np.ix_(tail, tail)] - a * np.eye(len(tail))))))
        else:
            a = float(np.mean(traces)) if traces else 0.0
        res = max(res, float(np.max(np.abs(A[~same]), initial=0.0)))
        if traces:
            res = max(res, float(np.max(np.abs(np.array(traces) - a))))
        a_list.append(a)
    return EqualityFormReport(f"delta_form{t}", bool(res <= FORM_TOL), res, {"a": a_list})


class LemmaResult(NamedTuple):
    holds: bool
    equality: bool
    margin: float


def chen_lemma_check(a, tol: float = 1e-12, eq_tol: float = 1e-9) -> LemmaResult:
    """Check 2 a_1 a_2 >= a_{n+1} given (sum a_i)^2/(n-1) = sum a_i^2 + a_{n+1}.

    ``equality`` reports the structural condition a_1 + a_2 = a_3 = ... = a_n.
    """
    a = np.asarray(a, dtype=float)
    n = len(a) - 1
    if n < 2:
        raise HypothesisViolated("need at least three numbers (n > 1)")
    head, last = a[:n], a[n]
    lhs_h = head.sum() ** 2 / (n - 1)
    rhs_h = np.sum(head**2) + last
    scale = max(1.0, abs(lhs_h), abs(rhs_h))
    if abs(lhs_h - rhs_h) > tol * scale:
        raise HypothesisViolated(f"hypothesis off by {lhs_h - rhs_h:.3e}")
    margin = float(2 * a[0] * a[1] - last)
    values = np.concatenate([[a[0] + a[1]], head[2:]])
    equality = bool(np.max(values) - np.min(values) <= eq_tol)
    return LemmaResult(bool(margin >= -tol * scale), equality, margin)


def chen_lemma_batch(a, tol: float = 1e-12, eq_tol: float = 1e-9):
    """Row-wise :func:`chen_lemma_check` for an (N, n+1) array.

    Returns boolean ``holds`` and ``equality`` arrays and the float ``margin``
    array; raises HypothesisViolated if any row misses the hypothesis.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] < 3:
        raise HypothesisViolated("need an (N, n+1) array with n > 1")
    n = a.shape[1] - 1
    head, last = a[:, :n], a[:, n]
    lhs_h = head.sum(axis=1) ** 2 / (n - 1)
    rhs_h = np.sum(head**2, axis=1) + last
    scale = np.maximum(1.0, np.maximum(np.abs(lhs_h), np.abs(rhs_h)))
    off = np.abs(lhs_h - rhs_h) > tol * scale
    if off.any():
        i = int(np.argmax(off))
        raise HypothesisViolated(f"row {i}: hypothesis off by {lhs_h[i] - rhs_h[i]:.3e}")
    margin = 2 * a[:, 0] * a[:, 1] - last
    values = np.column_stack([a[:, 0] + a[:, 1], head[:, 2:]])
    equality = values.max(axis=1) - values.min(axis=1) <= eq_tol
    return margin >= -tol * scale, equality, margin
