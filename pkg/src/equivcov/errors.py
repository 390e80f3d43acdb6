"""Exception hierarchy shared by the library and the command-line front end."""

from __future__ import annotations


class EquivcovError(Exception):
    """Base class for every error raised by this package."""


class InvalidDataError(EquivcovError, ValueError):
    """Input data is malformed or contains non-finite values."""


class ConfigurationError(EquivcovError, ValueError):
    """A configuration object or option combination is invalid."""


class DomainError(EquivcovError, ValueError):
    """A numerical rule was applied outside its domain of validity.

    ``rule`` and ``index`` locate the failure when it is specific to one
    shrinkage rule or one eigenvalue position (0-based).
    """

    def __init__(self, message: str, *, rule: str | None = None, index: int | None = None) -> None:
        super().__init__(message)
        self.rule = rule
        self.index = index


class SingularityError(DomainError):
    """A denominator vanished."""


class PoleError(DomainError):
    """A Stieltjes transform was evaluated exactly at one of its poles."""


class ClusteredSpectrumError(DomainError):
    """Two eigenvalues are too close for a principal-value computation."""

    def __init__(self, message: str, *, pair: tuple[int, int], rule: str | None = None) -> None:
        super().__init__(message, rule=rule, index=pair[0])
        self.pair = pair


class NumericalError(EquivcovError, ArithmeticError):
    """An iterative algorithm failed to converge; ``residual`` is the final off-diagonal norm."""

    def __init__(self, message: str, *, residual: float) -> None:
        super().__init__(message)
        self.residual = residual
