"""Exception hierarchy shared by the exact and numeric layers."""

from __future__ import annotations


class AWError(Exception):
    """Base class for every error raised by awfactor."""


class DivisionByZero(AWError, ZeroDivisionError):
    pass


class PoleAtPoint(AWError):
    pass


class ZeroArgument(AWError):
    pass


class NotSymmetric(AWError):
    pass


class InvalidParams(AWError, ValueError):
    pass


class DegenerateLevel(AWError):
    """Raised when two consecutive eigenvalues coincide at level ``n``."""

    def __init__(self, n: int, message: str | None = None):
        self.n = n
        super().__init__(message or f"degenerate level n={n}: lambda(n) == lambda(n+1)")


class ZeroDeformation(AWError, ValueError):
    pass


class AsymmetricIntermediate(AWError):
    pass


class InitialConditionViolated(AWError):
    pass


class DivergentProduct(AWError):
    pass


class DenominatorPochhammerZero(AWError):
    pass


class NonConvergent(AWError):
    pass


class SeriesDenominatorZero(AWError):
    pass


class CoefficientProductZero(AWError):
    pass
