"""Tangent space of a generalized (kappa, mu)-space form with divided R5.

Coordinates are orthonormal and the characteristic vector xi is the last
coordinate vector, so eta(X) is simply ``X[-1]``.  The structure tensors phi
and h are stored as matrices acting on column vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import BadIndex, BadSpec, DimensionMismatch, SingularKappa
from .linalg import _frozen, skew_op, sym_op

STRUCTURE_TOL = 1e-10
SASAKIAN_TOL = 1e-12
COMPONENTS = (1, 2, 3, 4, 51, 52, 6)


@dataclass(frozen=True)
class FCoefficients:
    """Values at one point of the seven structure functions."""

    f1: float
    f2: float
    f3: float
    f4: float
    f51: float
    f52: float
    f6: float

    def __post_init__(self):
        for fld in fields(self):
            v = float(getattr(self, fld.name))
            if not np.isfinite(v):
                raise BadSpec(f"{fld.name} must be finite, got {v}")
            object.__setattr__(self, fld.name, v)

    @classmethod
    def from_undivided(cls, f1, f2, f3, f4, f5, f6) -> "FCoefficients":
        """Embed the six-function form: f51 = f5, f52 = -f5."""
        return cls(f1, f2, f3, f4, f5, -f5, f6)

    def as_tuple(self) -> tuple:
        return (self.f1, self.f2, self.f3, self.f4, self.f51, self.f52, self.f6)

    def coefficient(self, idx: int) -> float:
        try:
            return self.as_tuple()[COMPONENTS.index(idx)]
        except ValueError:
            raise BadIndex(f"curvature component index must be one of {COMPONENTS}") from None


def kappa_mu_coefficients(c: float, kappa: float, mu: float) -> FCoefficients:
    """Constant coefficients of a (kappa, mu)-space form with phi-sectional curvature c."""
    return FCoefficients.from_undivided(
        (c + 3) / 4, (c - 1) / 4, (c + 3) / 4 - kappa, 1.0, 0.5, 1.0 - mu
    )


def non_sasakian_divided_coefficients(kappa: float, mu: float) -> FCoefficients:
    if kappa == 1:
        raise SingularKappa("kappa = 1 makes the divided R5 coefficients singular")
    return FCoefficients(
        (2 - mu) / 2,
        -mu / 2,
        (2 - mu - 2 * kappa) / 2,
        1.0,
        (2 - mu) / (2 * (1 - kappa)),
        (2 * kappa - mu) / (2 * (1 - kappa)),
        1.0 - mu,
    )


def classify_sasakian(f: FCoefficients) -> bool:
    """Contact-metric criterion f3 = f1 - 1."""
    return abs(f.f3 - (f.f1 - 1.0)) <= SASAKIAN_TOL


def canonical_phi(m: int) -> np.ndarray:
    """phi X_i = phi-partner e_{m+i}, phi e_{m+i} = -X_i, phi xi = 0."""
    d = 2 * m + 1
    phi = np.zeros((d, d))
    for i in range(m):
        phi[m + i, i] = 1.0
        phi[i, m + i] = -1.0
    return phi


def adapted_h(h_eigenvalues) -> np.ndarray:
    """h X_i = l_i X_i, h phi X_i = -l_i phi X_i, h xi = 0 in the canonical basis."""
    lam = np.asarray(h_eigenvalues, dtype=float)
    return np.diag(np.concatenate([lam, -lam, [0.0]]))


@dataclass(frozen=True, eq=False)
class AmbientPoint:
    m: int
    phi: np.ndarray
    h: np.ndarray
    f: FCoefficients

    def __post_init__(self):
        d = 2 * int(self.m) + 1
        object.__setattr__(self, "m", int(self.m))
        phi = np.asarray(self.phi, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if phi.shape != (d, d) or h.shape != (d, d):
            raise DimensionMismatch(f"phi and h must be {d}x{d} for m={self.m}")
        object.__setattr__(self, "phi", skew_op(phi))
        object.__setattr__(self, "h", sym_op(h))
        object.__setattr__(self, "phih", _frozen(self.phi @ self.h))

    @classmethod
    def canonical(cls, m: int, f: FCoefficients, h_eigenvalues=None) -> "AmbientPoint":
        lam = np.zeros(m) if h_eigenvalues is None else np.asarray(h_eigenvalues, dtype=float)
        if lam.shape != (m,):
            raise BadSpec(f"need {m} h eigenvalues, got {lam.shape}")
        return cls(m, canonical_phi(m), adapted_h(lam), f)

    @property
    def dim(self) -> int:
        return 2 * self.m + 1

    @property
    def xi(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[-1] = 1.0
        return e

    def eta(self, x) -> float:
        return float(np.asarray(x)[-1])

    def conjugated(self, O: np.ndarray) -> "AmbientPoint":
        """Apply an orthogonal change of basis O (must fix xi)."""
        return AmbientPoint(self.m, O @ self.phi @ O.T, O @ self.h @ O.T, self.f)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "f": list(self.f.as_tuple()),
            "phi": self.phi.tolist(),
            "h": self.h.tolist(),
            "convention": "orthonormal coordinates; xi is the last basis vector",
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AmbientPoint":
        return cls(int(data["m"]), np.array(data["phi"]), np.array(data["h"]),
                   FCoefficients(*data["f"]))


def validate_ambient(A: AmbientPoint) -> list[dict]:
    """Residuals of the almost contact metric and h-tensor identities.

    Returns one ``{"identity", "residual"}`` record per identity whose max
    absolute residual exceeds ``STRUCTURE_TOL``; an empty list means valid.
    """
    d = A.dim
    eye = np.eye(d)
    xi = A.xi
    eta = xi  # eta is the row functional <xi, .>
    phi, h = A.phi, A.h
    checks = {
        "phi^2=-I+eta(x)xi": phi @ phi + eye - np.outer(xi, eta),
        "phi xi=0": phi @ xi,
        "eta o phi=0": eta @ phi,
        "<phiX,phiY>=<X,Y>-eta(X)eta(Y)": phi.T @ phi - eye + np.outer(eta, eta),
        "h xi=0": h @ xi,
        "h phi+phi h=0": h @ phi + phi @ h,
        "tr(h)=0": np.trace(h),
        "tr(phi h)=0": np.trace(phi @ h),
    }
    out = []
    for name, resid in checks.items():
        r = float(np.max(np.abs(resid)))
        if not r <= STRUCTURE_TOL:
            out.append({"identity": name, "residual": r})
    return out


def curvature_component(A: AmbientPoint, idx: int, X, Y, Z) -> np.ndarray:
    """The vector R_idx(X, Y)Z for one of the seven canonical tensors."""
    X, Y, Z = (np.asarray(v, dtype=float) for v in (X, Y, Z))
    for v in (X, Y, Z):
        if v.shape != (A.dim,):
            raise DimensionMismatch(f"vectors must have length {A.dim}")
    phi, h, xi = A.phi, A.h, A.xi
    eX, eY, eZ = X[-1], Y[-1], Z[-1]
    if idx == 1:
        return (Y @ Z) * X - (X @ Z) * Y
    if idx == 2:
        return (X @ (phi @ Z)) * (phi @ Y) - (Y @ (phi @ Z)) * (phi @ X) + 2 * (X @ (phi @ Y)) * (phi @ Z)
    if idx == 3:
        return eX * eZ * Y - eY * eZ * X + (X @ Z) * eY * xi - (Y @ Z) * eX * xi
    if idx == 4:
        return (Y @ Z) * (h @ X) - (X @ Z) * (h @ Y) + ((h @ Y) @ Z) * X - ((h @ X) @ Z) * Y
    if idx == 51:
        return ((h @ Y) @ Z) * (h @ X) - ((h @ X) @ Z) * (h @ Y)
    if idx == 52:
        phX, phY = A.phih @ X, A.phih @ Y
        return (phY @ Z) * phX - (phX @ Z) * phY
    if idx == 6:
        return eX * eZ * (h @ Y) - eY * eZ * (h @ X) + ((h @ X) @ Z) * eY * xi - ((h @ Y) @ Z) * eX * xi
    raise BadIndex(f"curvature component index must be one of {COMPONENTS}, got {idx!r}")


def ambient_curvature(A: AmbientPoint, X, Y, Z, W) -> float:
    """R(X, Y, Z, W) = <sum_i f_i R_i(X, Y)Z, W>."""
    W = np.asarray(W, dtype=float)
    if W.shape != (A.dim,):
        raise DimensionMismatch(f"vectors must have length {A.dim}")
    total = np.zeros(A.dim)
    for idx in COMPONENTS:
        c = A.f.coefficient(idx)
        if c != 0.0:
            total += c * curvature_component(A, idx, X, Y, Z)
    return float(total @ W)


def curvature_tensor_on(A: AmbientPoint, E: np.ndarray) -> np.ndarray:
    """T[a, b, c, e] = R(E_a, E_b, E_c, E_e) for the rows of E, fully vectorized.

    This is an independent evaluation route from :func:`ambient_curvature`;
    the two are cross-checked in the tests.
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if E.shape[1] != A.dim:
        raise DimensionMismatch(f"vectors must have length {A.dim}")
    g = E @ E.T
    F = E @ A.phi @ E.T  # F[a, b] = <E_a, phi E_b>
    Hm = E @ A.h @ E.T  # <h E_a, E_b>
    P = E @ A.phih.T @ E.T  # P[a, b] = <phi h E_a, E_b>
    eta = E[:, -1]
    ein = np.einsum
    f = A.f
    T = f.f1 * (ein("bc,ae->abce", g, g) - ein("ac,be->abce", g, g))
    T += f.f2 * (
        ein("ac,eb->abce", F, F) - ein("bc,ea->abce", F, F) + 2 * ein("ab,ec->abce", F, F)
    )
    ee = np.outer(eta, eta)
    T += f.f3 * (
        ein("ac,be->abce", ee, g) - ein("bc,ae->abce", ee, g)
        + ein("ac,be->abce", g, ee) - ein("bc,ae->abce", g, ee)
    )
    T += f.f4 * (
        ein("bc,ae->abce", g, Hm) - ein("ac,be->abce", g, Hm)
        + ein("bc,ae->abce", Hm, g) - ein("ac,be->abce", Hm, g)
    )
    T += f.f51 * (ein("bc,ae->abce", Hm, Hm) - ein("ac,be->abce", Hm, Hm))
    T += f.f52 * (ein("bc,ae->abce", P, P) - ein("ac,be->abce", P, P))
    T += f.f6 * (
        ein("ac,be->abce", ee, Hm) - ein("bc,ae->abce", ee, Hm)
        + ein("ac,be->abce", Hm, ee) - ein("bc,ae->abce", Hm, ee)
    )
    return T
