"""Exception hierarchy shared by all gammaforge modules."""

from __future__ import annotations


class GammaForgeError(Exception):
    """Base class for every error raised by this package."""


class JetShapeError(GammaForgeError):
    """Jet operands do not share dimension, order, or base point."""


class JetDomainError(GammaForgeError):
    """A univariate function was evaluated outside its smooth domain.

    Raised instead of producing NaN payloads: a poisoned jet would silently
    corrupt every tensor computed downstream.
    """


class SingularJetMatrixError(GammaForgeError):
    """The value part of a jet matrix is numerically singular."""

    def __init__(self, message: str, smallest_singular_value: float):
        super().__init__(f"{message} (smallest singular value {smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


class ExpressionError(GammaForgeError):
    """Coefficient expression could not be parsed or validated."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class SpecFormatError(GammaForgeError):
    """Generator spec file or catalog entry has an invalid shape."""


class DegenerateMetricError(GammaForgeError):
    """Co-metric failed the positive-definiteness check at a point."""

    def __init__(self, message: str, min_eigenvalue: float, point=None):
        if point is not None:
            message = f"{message} at point {tuple(point)}"
        super().__init__(f"{message} (min eigenvalue {min_eigenvalue:.3e})")
        self.min_eigenvalue = min_eigenvalue
        self.point = None if point is None else tuple(point)


class NonSymmetricGeneratorError(GammaForgeError):
    """Drift one-form is not closed: no invariant density exists."""

    def __init__(self, closedness_residual: float):
        super().__init__(
            "non-symmetric generator: no invariant density "
            f"(closedness residual {closedness_residual:.3e})"
        )
        self.closedness_residual = closedness_residual


class UnsupportedSpecError(GammaForgeError):
    """Spec falls outside what an operation supports (e.g. non-diagonal grid metric)."""


class SingularMapError(GammaForgeError):
    """A candidate conjugacy map has a singular Jacobian at a sample point."""
