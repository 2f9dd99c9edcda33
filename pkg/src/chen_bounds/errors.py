"""Exception hierarchy.

Every error raised deliberately by the package derives from
:class:`ChenBoundsError` (itself a ``ValueError``), so callers can catch the
whole family at once.
"""

from __future__ import annotations


class ChenBoundsError(ValueError):
    pass


# linear algebra
class RankDeficient(ChenBoundsError):
    pass


class BadDimension(ChenBoundsError):
    pass


class DimensionMismatch(ChenBoundsError):
    pass


class VectorNotInSubspace(ChenBoundsError):
    pass


# ambient structure
class BadIndex(ChenBoundsError):
    pass


class SingularKappa(ChenBoundsError):
    pass


# submanifold data
class NotCTotallyReal(ChenBoundsError):
    pass


class BadFrame(ChenBoundsError):
    pass


class AsymmetricSigma(ChenBoundsError):
    pass


class NotTangent(ChenBoundsError):
    pass


# invariants and checks
class TupleNotInS(ChenBoundsError):
    pass


class BadK(ChenBoundsError):
    pass


class DimensionTooSmall(ChenBoundsError):
    pass


class BadPlane(ChenBoundsError):
    pass


class NotUnit(ChenBoundsError):
    pass


class NotSasakianMode(ChenBoundsError):
    pass


class BadTuple(ChenBoundsError):
    pass


class HypothesisViolated(ChenBoundsError):
    pass


# generators
class BadSpec(ChenBoundsError):
    pass


class DimensionTooLarge(ChenBoundsError):
    pass


class IncompatibleXiConstraint(ChenBoundsError):
    pass


class TraceMismatch(ChenBoundsError):
    pass


class TooLarge(ChenBoundsError):
    pass


class ValidationFailed(ChenBoundsError):
    """An instance file failed to load or validate."""

    def __init__(self, instance: str, violation: str):
        super().__init__(f"{instance}: {violation}")
        self.instance = instance
        self.violation = violation
